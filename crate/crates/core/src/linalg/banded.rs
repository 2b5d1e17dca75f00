use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored with
/// `kl` extra super-diagonals of room for fill-in from row interchanges.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandedMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    /// Adds `v` to entry (i, j), which must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "({i}, {j}) outside the band"
        );
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "({i}, {j}) outside the band"
        );
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    /// Multiplies row `i` (matrix entries only) by `s`.
    pub fn scale_row(&mut self, i: usize, s: f64) {
        let start = i * self.width;
        for v in &mut self.data[start..start + self.width] {
            *v *= s;
        }
    }

    /// Largest magnitude in row `i`.
    pub fn row_max(&self, i: usize) -> f64 {
        let start = i * self.width;
        self.data[start..start + self.width]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Gaussian elimination with partial pivoting; consumes the matrix.
    pub fn solve(mut self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::Singular("right-hand side length mismatch".into()));
        }
        let mut b = rhs.to_vec();
        let reach = self.kl + self.ku;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + reach).min(n - 1);
            let mut piv = k;
            let mut best = self.data[self.slot(k, k)].abs();
            for r in k + 1..=last_row {
                let v = self.data[self.slot(r, k)].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            if piv != k {
                for c in k..=last_col {
                    let (a, z) = (self.slot(k, c), self.slot(piv, c));
                    self.data.swap(a, z);
                }
                b.swap(k, piv);
            }
            let pivot = self.data[self.slot(k, k)];
            for r in k + 1..=last_row {
                let sr = self.slot(r, k);
                let factor = self.data[sr] / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.data[sr] = 0.0;
                for c in k + 1..=last_col {
                    let kc = self.data[self.slot(k, c)];
                    let rc = self.slot(r, c);
                    self.data[rc] -= factor * kc;
                }
                b[r] -= factor * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let last_col = (k + reach).min(n - 1);
            let mut acc = b[k];
            for (c, xc) in x.iter().enumerate().take(last_col + 1).skip(k + 1) {
                acc -= self.data[self.slot(k, c)] * xc;
            }
            x[k] = acc / self.data[self.slot(k, k)];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("non-finite solution".into()));
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn needs_row_interchange() {
        // [[0, 1], [2, 3]] x = [1, 8] -> x = [2.5, 1]
        let mut a = BandedMatrix::zeros(2, 1, 1);
        a.set(0, 1, 1.0);
        a.set(1, 0, 2.0);
        a.set(1, 1, 3.0);
        let x = a.solve(&[1.0, 8.0]).unwrap();
        assert!((x[0] - 2.5).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_reported() {
        let mut a = BandedMatrix::zeros(3, 1, 1);
        a.set(0, 0, 1.0);
        a.set(1, 0, 1.0);
        assert!(a.solve(&[1.0, 1.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn residual_is_small_for_random_band_systems(
            n in 1usize..40,
            kl in 0usize..6,
            ku in 0usize..6,
            seed in proptest::collection::vec(-1.0f64..1.0, 40 * 13),
            x_true in proptest::collection::vec(-10.0f64..10.0, 40),
        ) {
            let mut a = BandedMatrix::zeros(n, kl, ku);
            let mut k = 0;
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    a.set(i, j, seed[k % seed.len()]);
                    k += 1;
                }
                // Every third row keeps a random (possibly tiny) diagonal.
                if i % 3 != 0 {
                    a.add(i, i, 4.0 * (kl + ku) as f64 + 1.0);
                }
            }
            let x = &x_true[..n];
            let b = a.mul_vec(x);
            let dense = a.clone();
            if let Ok(sol) = a.solve(&b) {
                let back = dense.mul_vec(&sol);
                for (u, v) in back.iter().zip(&b) {
                    prop_assert!((u - v).abs() < 1e-8 * (1.0 + v.abs()));
                }
            }
        }
    }
}
