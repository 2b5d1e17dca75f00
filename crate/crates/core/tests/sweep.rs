use thinfilm::device::Preset;
use thinfilm::optics::SolarSpectrum;
use thinfilm::sweep::{best_cell, run_grid_sweep, Metric, SweepAxis, SweepConfig, SweepParam};

fn cfg(jobs: usize) -> SweepConfig {
    SweepConfig {
        jobs,
        ..SweepConfig::default()
    }
}

#[test]
fn repeated_axis_values_are_rejected() {
    assert!(SweepAxis::new("CdS", SweepParam::ThicknessUm, vec![0.5, 0.5]).is_err());
}

#[test]
fn template_corner_matches_direct_run() {
    let stack = Preset::PnBaseline.build(300.0).unwrap();
    let a = SweepAxis::new("CdS", SweepParam::ThicknessUm, vec![0.5, 1.0]).unwrap();
    let b = SweepAxis::new("CIGS", SweepParam::ThicknessUm, vec![0.5, 1.0]).unwrap();
    let result = run_grid_sweep(&stack, &a, &b, &SolarSpectrum::am15g(), &cfg(1)).unwrap();
    let corner = result.cells[0][0].as_ref().unwrap();
    let direct = {
        let curve = thinfilm::analysis::compute_jv(
            &stack,
            &thinfilm::analysis::SimConfig::default(),
            Some(&SolarSpectrum::am15g()),
        )
        .unwrap();
        thinfilm::analysis::extract_metrics(&curve).unwrap()
    };
    assert_eq!(corner, &direct);
}

#[test]
fn same_layer_and_parameter_twice_is_rejected() {
    let stack = Preset::PnBaseline.build(300.0).unwrap();
    let a = SweepAxis::new("CdS", SweepParam::ThicknessUm, vec![0.5, 1.0]).unwrap();
    assert!(run_grid_sweep(&stack, &a, &a, &SolarSpectrum::am15g(), &cfg(1)).is_err());
}

#[test]
fn unknown_layer_aborts_before_solving() {
    let stack = Preset::PnBaseline.build(300.0).unwrap();
    let a = SweepAxis::new("GaAs", SweepParam::ThicknessUm, vec![0.5, 1.0]).unwrap();
    let b = SweepAxis::new("CdS", SweepParam::ThicknessUm, vec![0.5, 1.0]).unwrap();
    let err = run_grid_sweep(&stack, &a, &b, &SolarSpectrum::am15g(), &cfg(1)).unwrap_err();
    assert!(err.to_string().contains("GaAs"), "{err}");
}

#[test]
fn parallel_sweep_matches_serial() {
    let stack = Preset::PnBaseline.build(300.0).unwrap();
    let a = SweepAxis::linear("CdS", SweepParam::ThicknessUm, 0.5, 1.5, 0.5).unwrap();
    let b = SweepAxis::decades("CIGS", SweepParam::DopingCm3, 14, 16).unwrap();
    let spectrum = SolarSpectrum::am15g();
    let serial = run_grid_sweep(&stack, &a, &b, &spectrum, &cfg(1)).unwrap();
    let parallel = run_grid_sweep(&stack, &a, &b, &spectrum, &cfg(3)).unwrap();
    assert_eq!(serial.cells, parallel.cells);
    for m in Metric::ALL {
        assert_eq!(serial.metric_csv(m), parallel.metric_csv(m));
        let x = best_cell(&serial, m).unwrap();
        let y = best_cell(&parallel, m).unwrap();
        assert_eq!((x.i, x.j), (y.i, y.j));
    }
}
