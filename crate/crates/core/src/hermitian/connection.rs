//! Left-invariant connections in the constant frame `e_i` and their curvature.

use nalgebra::DMatrix;

use super::metric::Metric;
use super::torsion::{bismut_torsion, dense_three_form};
use crate::complex::ComplexStructure;
use crate::error::{Error, Result};
use crate::lie::LieAlgebra;
use crate::linalg;

/// `∇_{e_i} e_j = sum_k Γ[(i*n + j)*n + k] e_k`, together with the metric it
/// was built from.
#[derive(Clone, Debug)]
pub struct Connection {
    dim: usize,
    gamma: Vec<f64>,
    metric: Metric,
}

impl Connection {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    #[inline]
    pub fn christoffel(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma[(i * self.dim + j) * self.dim + k]
    }

    /// Matrix of `∇_{e_i}` acting on vectors: column `j` is `∇_{e_i} e_j`.
    pub fn covariant_matrix(&self, i: usize) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |k, j| self.christoffel(i, j, k))
    }

    /// `T(e_i, e_j) = ∇_i e_j - ∇_j e_i - [e_i, e_j]`, lowered with `g`:
    /// entry `(i*n + j)*n + k` is `g(T(e_i, e_j), e_k)`.
    pub fn torsion_lowered(&self, lie: &LieAlgebra) -> Vec<f64> {
        let n = self.dim;
        let gm = self.metric.matrix();
        let mut out = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = 0.0;
                    for m in 0..n {
                        let t = self.christoffel(i, j, m) - self.christoffel(j, i, m)
                            - lie.structure_constant(i, j, m);
                        acc += t * gm[(m, k)];
                    }
                    out[(i * n + j) * n + k] = acc;
                }
            }
        }
        out
    }

    /// `max_i |A_i^T G + G A_i|` (zero iff `∇g = 0`).
    pub fn metric_residual(&self) -> f64 {
        let gm = self.metric.matrix();
        (0..self.dim)
            .map(|i| {
                let a = self.covariant_matrix(i);
                linalg::max_abs(&(a.transpose() * gm + gm * &a))
            })
            .fold(0.0, f64::max)
    }

    /// `max_i |A_i J - J A_i|` (zero iff `∇J = 0`).
    pub fn complex_residual(&self, j: &ComplexStructure) -> f64 {
        let jm = j.matrix();
        (0..self.dim)
            .map(|i| {
                let a = self.covariant_matrix(i);
                linalg::max_abs(&(&a * jm - jm * &a))
            })
            .fold(0.0, f64::max)
    }

    pub fn max_difference(&self, other: &Connection) -> f64 {
        self.gamma
            .iter()
            .zip(&other.gamma)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// Koszul formula on left-invariant fields:
/// `2 g(∇_x y, z) = g([x,y],z) - g([y,z],x) + g([z,x],y)`.
pub fn levi_civita(lie: &LieAlgebra, g: &Metric) -> Result<Connection> {
    let n = lie.dim();
    if g.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g.dim() });
    }
    let lowered = lowered_brackets(lie, g);
    let ginv = g
        .matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidMetric("singular metric".into()))?;
    let mut gamma = vec![0.0; n * n * n];
    for x in 0..n {
        for y in 0..n {
            let mut low = vec![0.0; n];
            for (z, slot) in low.iter_mut().enumerate() {
                *slot = 0.5
                    * (lowered[(x * n + y) * n + z] - lowered[(y * n + z) * n + x]
                        + lowered[(z * n + x) * n + y]);
            }
            raise_into(&mut gamma[(x * n + y) * n..(x * n + y + 1) * n], &ginv, &low);
        }
    }
    Ok(Connection { dim: n, gamma, metric: g.clone() })
}

/// `∇^B = ∇^LC + ½ g^{-1} T^B(x, y, ·)`.
pub fn bismut_connection(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<Connection> {
    let torsion = dense_three_form(&bismut_torsion(lie, j, g)?);
    with_torsion(lie, g, &torsion)
}

/// `∇^LC + ½ g^{-1} T(x, y, ·)` for a dense 3-form `T`.
pub(crate) fn with_torsion(lie: &LieAlgebra, g: &Metric, torsion: &[f64]) -> Result<Connection> {
    let mut conn = levi_civita(lie, g)?;
    let n = lie.dim();
    let ginv = g.matrix().clone().try_inverse().expect("checked by levi_civita");
    for x in 0..n {
        for y in 0..n {
            let low: Vec<f64> = (0..n).map(|z| 0.5 * torsion[(x * n + y) * n + z]).collect();
            let mut raised = vec![0.0; n];
            raise_into(&mut raised, &ginv, &low);
            for (k, v) in raised.into_iter().enumerate() {
                conn.gamma[(x * n + y) * n + k] += v;
            }
        }
    }
    Ok(conn)
}

fn raise_into(out: &mut [f64], ginv: &DMatrix<f64>, low: &[f64]) {
    let n = low.len();
    for (k, o) in out.iter_mut().enumerate() {
        *o = (0..n).map(|m| ginv[(k, m)] * low[m]).sum();
    }
}

/// `g([e_a, e_b], e_c)` at `(a*n + b)*n + c`.
pub(crate) fn lowered_brackets(lie: &LieAlgebra, g: &Metric) -> Vec<f64> {
    let n = lie.dim();
    let gm = g.matrix();
    let mut out = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                out[(a * n + b) * n + c] = (0..n).map(|k| lie.structure_constant(a, b, k) * gm[(k, c)]).sum();
            }
        }
    }
    out
}

/// `R(i, j, k, l) = g(R(e_i, e_j) e_k, e_l)` with
/// `R(x, y) = ∇_x ∇_y - ∇_y ∇_x - ∇_[x,y]`.
#[derive(Clone, Debug)]
pub struct CurvatureTensor {
    dim: usize,
    r: Vec<f64>,
    endo: Vec<DMatrix<f64>>,
}

impl CurvatureTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.dim;
        self.r[((i * n + j) * n + k) * n + l]
    }

    /// `R(e_i, e_j)` as an endomorphism.
    pub fn endomorphism(&self, i: usize, j: usize) -> &DMatrix<f64> {
        &self.endo[i * self.dim + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.r.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// `max |R(x,y,z,w) + R(y,z,x,w) + R(z,x,y,w)|`: the cyclic sum runs over
    /// the first three slots.
    pub fn first_bianchi_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let s = self.get(i, j, k, l) + self.get(j, k, i, l) + self.get(k, i, j, l);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// `max |R(x,y,z,w) - R(Jx,Jy,z,w)|`.
    pub fn type_residual(&self, j: &ComplexStructure) -> f64 {
        let n = self.dim;
        let jm = j.matrix();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for jj in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut rotated = 0.0;
                        for a in 0..n {
                            let ja = jm[(a, i)];
                            if ja == 0.0 {
                                continue;
                            }
                            for b in 0..n {
                                let jb = jm[(b, jj)];
                                if jb != 0.0 {
                                    rotated += ja * jb * self.get(a, b, k, l);
                                }
                            }
                        }
                        worst = worst.max((self.get(i, jj, k, l) - rotated).abs());
                    }
                }
            }
        }
        worst
    }

    /// Antisymmetry defects in `(i, j)` and in `(k, l)`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        worst = worst
                            .max((self.get(i, j, k, l) + self.get(j, i, k, l)).abs())
                            .max((self.get(i, j, k, l) + self.get(i, j, l, k)).abs());
                    }
                }
            }
        }
        worst
    }
}

pub fn curvature(conn: &Connection, lie: &LieAlgebra) -> Result<CurvatureTensor> {
    let n = conn.dim();
    if lie.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: lie.dim() });
    }
    let a: Vec<DMatrix<f64>> = (0..n).map(|i| conn.covariant_matrix(i)).collect();
    let gm = conn.metric().matrix();
    let mut endo = Vec::with_capacity(n * n);
    let mut r = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            let mut m = &a[i] * &a[j] - &a[j] * &a[i];
            for (k, ak) in a.iter().enumerate() {
                let c = lie.structure_constant(i, j, k);
                if c != 0.0 {
                    m -= ak * c;
                }
            }
            // g(R e_k, e_l) = (M^T G)_{k l}
            let low = m.transpose() * gm;
            for k in 0..n {
                for l in 0..n {
                    r[((i * n + j) * n + k) * n + l] = low[(k, l)];
                }
            }
            endo.push(m);
        }
    }
    Ok(CurvatureTensor { dim: n, r, endo })
}
