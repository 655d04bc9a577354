//! The linearised geodesic flow of the round sphere in ambient coordinates.
//!
//! A tangent vector to `TS^{2n-1}` at `(x, v)` is a pair `(A, B)` of ambient
//! vectors (horizontal, vertical). Writing `U = span(x, v)`, the time-`tau`
//! flow followed by the deck element `T^{-k}` acts as
//!
//! * on `U^perp`: `(A, B) -> T^{-k}(cos tau A + sin tau B, -sin tau A + cos tau B)`,
//! * `(v, 0) -> (v, 0)` and `(0, v) -> (tau v, v)` (the speed shear),
//! * `(x, 0)` and `(0, x)` fixed (normal directions, padded with the identity).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::lens::{GeodesicComponent, LensSpace};
use crate::{Error, Result};

/// `T^k` on `R^{2n}`, block `i` the rotation by `2 pi k p_i / q`.
pub fn rotation_power(q: u32, p: &[u32], k: i64) -> DMatrix<f64> {
    let n = p.len();
    let mut t = DMatrix::zeros(2 * n, 2 * n);
    for (i, &pi) in p.iter().enumerate() {
        let r = (pi as i64 * k).rem_euclid(q as i64);
        let th = 2.0 * PI * r as f64 / q as f64;
        let (s, c) = th.sin_cos();
        t[(2 * i, 2 * i)] = c;
        t[(2 * i, 2 * i + 1)] = -s;
        t[(2 * i + 1, 2 * i)] = s;
        t[(2 * i + 1, 2 * i + 1)] = c;
    }
    t
}

/// Canonical form `Omega((A,B),(A',B')) = <A,B'> - <B,A'>`.
pub fn canonical_form(dim: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * dim, 2 * dim);
    for i in 0..dim {
        om[(i, dim + i)] = 1.0;
        om[(dim + i, i)] = -1.0;
    }
    om
}

#[derive(Clone, Debug)]
pub struct FlowDifferential {
    pub x: DVector<f64>,
    pub v: DVector<f64>,
    pub tau: f64,
    pub k: u32,
    /// `4n x 4n`, acting on `(A, B)`.
    pub matrix: DMatrix<f64>,
}

impl FlowDifferential {
    pub fn ambient_dim(&self) -> usize {
        self.x.len()
    }

    /// `max |M^T Omega M - Omega|`.
    pub fn symplectic_defect(&self) -> f64 {
        let om = canonical_form(self.ambient_dim());
        (self.matrix.transpose() * &om * &self.matrix - om).amax()
    }

    /// `det(Id - M)` on the 4-plane of coordinate block `i` (horizontal and
    /// vertical), which is invariant when `x` vanishes on that block.
    pub fn block_determinant(&self, i: usize) -> f64 {
        self.restricted_determinant(&[i])
    }

    /// `det(Id - M)` on the sum of the 4-planes of the given blocks.
    pub fn restricted_determinant(&self, blocks: &[usize]) -> f64 {
        let d = self.ambient_dim();
        let idx: Vec<usize> = blocks
            .iter()
            .flat_map(|&i| [2 * i, 2 * i + 1, d + 2 * i, d + 2 * i + 1])
            .collect();
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| {
            let id = if r == c { 1.0 } else { 0.0 };
            id - self.matrix[(idx[r], idx[c])]
        });
        sub.determinant()
    }
}

/// Uniform point on the unit sphere of the class coordinates.
pub fn sample_point<R: Rng>(lens: &LensSpace, c: &GeodesicComponent, rng: &mut R) -> DVector<f64> {
    let mut x = DVector::<f64>::zeros(2 * lens.n());
    for &i in &c.members {
        x[2 * i] = rng.sample::<f64, _>(StandardNormal);
        x[2 * i + 1] = rng.sample::<f64, _>(StandardNormal);
    }
    let norm = x.norm();
    x / norm
}

/// The differential at `(x, v)` for an arbitrary deck exponent and time.
pub fn flow_differential(
    lens: &LensSpace,
    k: u32,
    tau: f64,
    x: &DVector<f64>,
    v: &DVector<f64>,
) -> DMatrix<f64> {
    let d = x.len();
    let pu = x * x.transpose() + v * v.transpose();
    let pp = DMatrix::identity(d, d) - &pu;
    let tinv = rotation_power(lens.q(), lens.p(), -(k as i64));
    let (s, c) = tau.sin_cos();
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d))
        .copy_from(&(&tinv * (&pp * c) + &pu));
    m.view_mut((0, d), (d, d))
        .copy_from(&(&tinv * (&pp * s) + v * v.transpose() * tau));
    m.view_mut((d, 0), (d, d)).copy_from(&(&tinv * (&pp * -s)));
    m.view_mut((d, d), (d, d))
        .copy_from(&(&tinv * (&pp * c) + &pu));
    m
}

/// Builds the differential of `T^{-k} o Phi_tau` at `x`, recovering the
/// initial direction from the deck element alone:
/// `v = (T^k x - cos tau x) / sin tau`.
pub fn jacobi_propagator(
    lens: &LensSpace,
    c: &GeodesicComponent,
    x: &DVector<f64>,
) -> Result<FlowDifferential> {
    let tau = c.tau_value();
    let k = c.effective_k(lens);
    let outside: f64 = (0..lens.n())
        .filter(|i| !c.members.contains(i))
        .map(|i| x[2 * i].abs() + x[2 * i + 1].abs())
        .sum();
    let tk = rotation_power(lens.q(), lens.p(), k as i64);
    let v = (&tk * x - x * tau.cos()) / tau.sin();
    let residual = outside + (x.norm() - 1.0).abs() + (v.norm() - 1.0).abs() + x.dot(&v).abs();
    if residual > 1e-8 {
        return Err(Error::OffSubsphere(residual));
    }
    let matrix = flow_differential(lens, k, tau, x, &v);
    Ok(FlowDifferential {
        x: x.clone(),
        v,
        tau,
        k,
        matrix,
    })
}

/// Transports `w` along `t -> cos t x + sin t v` for time `tau` by RK4 on
/// `W' = -<W, sigma'> sigma` and returns `|W(tau) - w|`.
pub fn parallel_transport_drift(
    x: &DVector<f64>,
    v: &DVector<f64>,
    w: &DVector<f64>,
    tau: f64,
    steps: usize,
) -> f64 {
    let rhs = |t: f64, y: &DVector<f64>| {
        let sigma = x * t.cos() + v * t.sin();
        let dsigma = x * -t.sin() + v * t.cos();
        sigma * -y.dot(&dsigma)
    };
    let h = tau / steps as f64;
    let mut y = w.clone();
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = rhs(t, &y);
        let k2 = rhs(t + h / 2.0, &(&y + &k1 * (h / 2.0)));
        let k3 = rhs(t + h / 2.0, &(&y + &k2 * (h / 2.0)));
        let k4 = rhs(t + h, &(&y + &k3 * h));
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    (y - w).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lens::{components, j_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn family() -> Vec<LensSpace> {
        let mut out = Vec::new();
        for q in 3..=11u32 {
            for p2 in 1..q as i64 {
                if let Ok(l) = LensSpace::new(q, &[1, p2]) {
                    out.push(l);
                }
                for p3 in p2..q as i64 {
                    if let Ok(l) = LensSpace::new(q, &[1, p2, p3]) {
                        out.push(l);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn identity_at_full_period() {
        let ls = LensSpace::new(5, &[1, 2]).unwrap();
        let mut x = DVector::zeros(4);
        x[0] = 1.0;
        let mut v = DVector::zeros(4);
        v[1] = 1.0;
        let m = flow_differential(&ls, 0, 2.0 * PI, &x, &v);
        // tangent space of the unit tangent bundle: A ⊥ x, B ⊥ v,
        // <A, v> + <x, B> = 0
        let mut basis = Vec::new();
        for e in [2usize, 3] {
            let mut a = DVector::zeros(8);
            a[e] = 1.0;
            basis.push(a.clone());
            let mut b = DVector::zeros(8);
            b[4 + e] = 1.0;
            basis.push(b);
        }
        let mut flow_dir = DVector::zeros(8);
        flow_dir[1] = 1.0;
        flow_dir[4] = -1.0;
        basis.push(flow_dir);
        for b in basis {
            assert!((&m * &b - &b).norm() < 1e-12);
        }
    }

    #[test]
    fn l52_block_determinant() {
        let ls = LensSpace::new(5, &[1, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = components(&ls, 1, 0).unwrap().remove(0);
        let x = sample_point(&ls, &c, &mut rng);
        let f = jacobi_propagator(&ls, &c, &x).unwrap();
        let expect = 4.0 * ((6.0 * PI / 5.0).cos() - (2.0 * PI / 5.0).cos()).powi(2);
        assert!((f.block_determinant(1) - expect).abs() < 1e-10);
    }

    #[test]
    fn off_subsphere_rejected() {
        let ls = LensSpace::new(7, &[1, 2, 3]).unwrap();
        let c = components(&ls, 1, 0).unwrap().remove(0);
        let x = DVector::from_element(6, 1.0 / 6f64.sqrt());
        assert!(matches!(
            jacobi_propagator(&ls, &c, &x),
            Err(Error::OffSubsphere(_))
        ));
    }

    #[test]
    fn block_identity_symplectic_and_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for ls in family() {
            for l in 1..=ls.max_l() {
                for c in components(&ls, l, 0).unwrap() {
                    let outside: Vec<usize> =
                        (0..ls.n()).filter(|i| !c.members.contains(i)).collect();
                    let k = c.effective_k(&ls) as i64;
                    for _ in 0..3 {
                        let x = sample_point(&ls, &c, &mut rng);
                        let f = jacobi_propagator(&ls, &c, &x).unwrap();
                        assert!(f.symplectic_defect() < 1e-9);
                        let mut prod = 1.0;
                        for &i in &outside {
                            let th = 2.0 * PI * (k * ls.p()[i] as i64) as f64 / ls.q() as f64;
                            let expect = 4.0 * (th.cos() - f.tau.cos()).powi(2);
                            let got = f.block_determinant(i);
                            assert!((got - expect).abs() < 1e-10, "{ls} l={l}");
                            prod *= got;
                        }
                        if !outside.is_empty() {
                            assert!((f.restricted_determinant(&outside) - prod).abs() < 1e-10);
                        }
                    }
                }
            }
        }
    }

    /// The true flow on the sphere, `(x, y) -> (cos(st) x + sin(st) u, ...)`.
    fn exact_flow(x: &DVector<f64>, y: &DVector<f64>, t: f64) -> (DVector<f64>, DVector<f64>) {
        let s = y.norm();
        let u = y / s;
        (
            x * (s * t).cos() + &u * (s * t).sin(),
            (x * -(s * t).sin() + &u * (s * t).cos()) * s,
        )
    }

    #[test]
    fn matches_finite_differences_of_the_true_flow() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (q, p) in [
            (3u32, vec![1i64, 1]),
            (7, vec![1, 1, 3]),
            (11, vec![1, 2, 5]),
        ] {
            let ls = LensSpace::new(q, &p).unwrap();
            for l in 1..=ls.max_l() {
                for c in components(&ls, l, 0).unwrap() {
                    let x = sample_point(&ls, &c, &mut rng);
                    let f = jacobi_propagator(&ls, &c, &x).unwrap();
                    let d = x.len();
                    let tinv = rotation_power(q, ls.p(), -(f.k as i64));
                    let mut a: DVector<f64> =
                        DVector::from_fn(d, |_, _| rng.sample(StandardNormal));
                    a -= &x * a.dot(&x);
                    let mut b: DVector<f64> =
                        DVector::from_fn(d, |_, _| rng.sample(StandardNormal));
                    b -= &x * b.dot(&x);
                    let eval = |h: f64| {
                        let xs = (&x + &a * h).normalize();
                        let ys = &f.v + &b * h;
                        let ys = &ys - &xs * ys.dot(&xs);
                        let (xx, yy) = exact_flow(&xs, &ys, f.tau);
                        (&tinv * xx, &tinv * yy)
                    };
                    let h = 1e-6;
                    let (x1, y1) = eval(h);
                    let (x0, y0) = eval(-h);
                    let dx = (x1 - x0) / (2.0 * h);
                    let mut dy = (y1 - y0) / (2.0 * h);
                    dy -= &x * dy.dot(&x);
                    let mut ab = DVector::zeros(2 * d);
                    ab.rows_mut(0, d).copy_from(&a);
                    ab.rows_mut(d, d).copy_from(&b);
                    let model = &f.matrix * ab;
                    let mut my = model.rows(d, d).into_owned();
                    my -= &x * my.dot(&x);
                    assert!((dx - model.rows(0, d)).amax() < 1e-7, "{} l={l}", ls);
                    assert!((dy - my).amax() < 1e-7, "{} l={l}", ls);
                }
            }
        }
    }

    #[test]
    fn parallel_transport_fixes_normal_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ls = LensSpace::new(7, &[1, 1, 3]).unwrap();
        for l in 1..=6 {
            for c in components(&ls, l, 0).unwrap() {
                let x = sample_point(&ls, &c, &mut rng);
                let j = j_matrix(&c.j_signs, 1);
                let v = &j * &x;
                for _ in 0..20 {
                    let mut w: DVector<f64> =
                        DVector::from_fn(6, |_, _| rng.sample(StandardNormal));
                    w -= &x * w.dot(&x);
                    w -= &v * w.dot(&v);
                    let drift = parallel_transport_drift(&x, &v, &w, c.tau_value(), 2000);
                    assert!(drift < 1e-9);
                }
            }
        }
    }
}
