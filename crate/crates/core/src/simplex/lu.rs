//! Dense LU factorization with partial pivoting, `P B = L U`.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug)]
pub(crate) struct LuFactor {
    m: usize,
    /// Row-major; strictly lower part holds `L` (unit diagonal implied).
    a: Vec<f64>,
    /// `perm[k]` is the original row placed at position `k`.
    perm: Vec<usize>,
}

/// Column `position` had no usable pivot; `free_rows` are the original rows
/// not yet pivoted at that point.
#[derive(Debug)]
pub(crate) struct Deficient {
    pub position: usize,
    pub free_rows: Vec<usize>,
}

impl LuFactor {
    pub fn identity(m: usize) -> Self {
        let mut a = vec![0.0; m * m];
        for k in 0..m {
            a[k * m + k] = 1.0;
        }
        LuFactor { m, a, perm: (0..m).collect() }
    }

    /// Factors the matrix whose `k`-th column is written by `fill(k, col)`.
    pub fn factor(m: usize, mut fill: impl FnMut(usize, &mut [f64]), pivot_tol: f64) -> Result<Self, Deficient> {
        let mut a = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for k in 0..m {
            col.iter_mut().for_each(|v| *v = 0.0);
            fill(k, &mut col);
            for i in 0..m {
                a[i * m + k] = col[i];
            }
        }
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let (mut p, mut best) = (k, a[k * m + k].abs());
            for i in k + 1..m {
                let v = a[i * m + k].abs();
                if v > best {
                    p = i;
                    best = v;
                }
            }
            if best <= pivot_tol {
                return Err(Deficient { position: k, free_rows: perm[k..].to_vec() });
            }
            if p != k {
                for j in 0..m {
                    a.swap(k * m + j, p * m + j);
                }
                perm.swap(k, p);
            }
            let piv = a[k * m + k];
            for i in k + 1..m {
                let l = a[i * m + k] / piv;
                if l != 0.0 {
                    a[i * m + k] = l;
                    for j in k + 1..m {
                        a[i * m + j] -= l * a[k * m + j];
                    }
                } else {
                    a[i * m + k] = 0.0;
                }
            }
        }
        Ok(LuFactor { m, a, perm })
    }

    /// Solves `B x = rhs` in place; on return `rhs[k]` is the coefficient of
    /// basis column `k`.
    pub fn solve(&self, rhs: &mut [f64]) {
        let m = self.m;
        let mut w: Vec<f64> = self.perm.iter().map(|&r| rhs[r]).collect();
        for k in 0..m {
            let row = &self.a[k * m..k * m + k];
            let s: f64 = row.iter().zip(&w[..k]).map(|(l, v)| l * v).sum();
            w[k] -= s;
        }
        for k in (0..m).rev() {
            let row = &self.a[k * m + k + 1..k * m + m];
            let s: f64 = row.iter().zip(&w[k + 1..]).map(|(u, v)| u * v).sum();
            w[k] = (w[k] - s) / self.a[k * m + k];
        }
        rhs.copy_from_slice(&w);
    }

    /// Solves `B' y = rhs` in place; `rhs[k]` enters as the cost of basis
    /// column `k` and leaves as the dual of original row `k`.
    pub fn solve_transpose(&self, rhs: &mut [f64]) {
        let m = self.m;
        let mut z = rhs.to_vec();
        for k in 0..m {
            let mut s = 0.0;
            for j in 0..k {
                s += self.a[j * m + k] * z[j];
            }
            z[k] = (z[k] - s) / self.a[k * m + k];
        }
        for k in (0..m).rev() {
            let mut s = 0.0;
            for j in k + 1..m {
                s += self.a[j * m + k] * z[j];
            }
            z[k] -= s;
        }
        for k in 0..m {
            rhs[self.perm[k]] = z[k];
        }
    }
}
