//! Numeric cleanliness ranks, the Duistermaat–Guillemin quotient, and the
//! component volume, all evaluated at sampled points.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::flow::{canonical_form, jacobi_propagator, sample_point};
use crate::lens::{j_matrix, GeodesicComponent, LensSpace};
use crate::{Error, Result};

pub const NULL_TOL: f64 = 1e-8;
pub const GREY_BAND: (f64, f64) = (1e-10, 1e-6);

/// Orthonormal basis (columns) of the complement of the given unit vectors.
fn complement_basis(dim: usize, vs: &[&DVector<f64>]) -> DMatrix<f64> {
    let mut proj = DMatrix::identity(dim, dim);
    for v in vs {
        proj -= *v * v.transpose();
    }
    let eig = SymmetricEigen::new(proj);
    let cols: Vec<DVector<f64>> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0.5)
        .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
        .collect();
    assert_eq!(cols.len(), dim - vs.len());
    DMatrix::from_columns(&cols)
}

/// `diag(B, B)` for a basis `B` of a subspace of the base.
fn doubled(b: &DMatrix<f64>) -> DMatrix<f64> {
    let (d, r) = b.shape();
    let mut q = DMatrix::zeros(2 * d, 2 * r);
    q.view_mut((0, 0), (d, r)).copy_from(b);
    q.view_mut((d, r), (d, r)).copy_from(b);
    q
}

struct Nullity {
    count: usize,
    grey: Option<f64>,
    /// Right singular vectors of the null space, as columns.
    kernel: DMatrix<f64>,
    /// Orthonormal complement of the kernel.
    complement: DMatrix<f64>,
}

fn nullity(p: &DMatrix<f64>) -> Nullity {
    let svd = SVD::new(p.clone(), true, true);
    let s = &svd.singular_values;
    let vt = svd.v_t.expect("requested");
    let count = s.iter().filter(|&&x| x < NULL_TOL).count();
    let grey = s
        .iter()
        .copied()
        .find(|&x| x >= GREY_BAND.0 && x <= GREY_BAND.1);
    let r = s.len();
    Nullity {
        count,
        grey,
        kernel: vt.rows(r - count, count).transpose(),
        complement: vt.rows(0, r - count).transpose(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CleanlinessReport {
    pub samples: usize,
    /// `2m - 2`, the expected nullity on `E + E` with `E = span(x, v)^perp`.
    pub expected_nullity: usize,
    pub nullities: Vec<usize>,
    /// `2m - 1`, the expected nullity on the tangent space of `TS`.
    pub expected_tangent_nullity: usize,
    pub tangent_nullities: Vec<usize>,
    /// Largest `|B - J A|` over kernel vectors `(A, B)`.
    pub graph_residual: f64,
    pub inconclusive: bool,
    pub pass: bool,
}

/// Nullity of `Id - D(T^{-k} o Phi_tau)` at sampled points, with the kernel
/// compared against the graph of `J_l`.
pub fn cleanliness_check(
    lens: &LensSpace,
    c: &GeodesicComponent,
    samples: usize,
    seed: u64,
) -> Result<CleanlinessReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 2 * lens.n();
    let j = j_matrix(&c.j_signs, 1);
    let m = c.m();
    let mut nullities = Vec::new();
    let mut tangent_nullities = Vec::new();
    let mut graph_residual: f64 = 0.0;
    let mut inconclusive = false;
    for _ in 0..samples {
        let x = sample_point(lens, c, &mut rng);
        let f = jacobi_propagator(lens, c, &x)?;
        let id_minus = DMatrix::identity(2 * d, 2 * d) - &f.matrix;

        let e = doubled(&complement_basis(d, &[&f.x, &f.v]));
        let ne = nullity(&(e.transpose() * &id_minus * &e));
        inconclusive |= ne.grey.is_some();
        nullities.push(ne.count);
        let kernel = &e * &ne.kernel;
        for col in kernel.column_iter() {
            let a = col.rows(0, d);
            let b = col.rows(d, d);
            graph_residual = graph_residual.max((b - &j * a).norm());
        }

        let t = doubled(&complement_basis(d, &[&f.x]));
        let nt = nullity(&(t.transpose() * &id_minus * &t));
        inconclusive |= nt.grey.is_some();
        tangent_nullities.push(nt.count);
    }
    let pass = !inconclusive
        && nullities.iter().all(|&k| k == 2 * m - 2)
        && tangent_nullities.iter().all(|&k| k == 2 * m - 1)
        && graph_residual < 1e-8;
    Ok(CleanlinessReport {
        samples,
        expected_nullity: 2 * m - 2,
        nullities,
        expected_tangent_nullity: 2 * m - 1,
        tangent_nullities,
        graph_residual,
        inconclusive,
        pass,
    })
}

/// The half-density quotient at one sampled point: with `P = Id - M` on the
/// tangent space of `TS`, `E = ker P`, and `F` the `Omega`-dual frame to `E`,
/// the density is `|det[P V_c, F]|^{-1/2}` for an orthonormal complement
/// `V_c` of `E`.
pub fn numeric_dg_at(lens: &LensSpace, c: &GeodesicComponent, x: &DVector<f64>) -> Result<f64> {
    let f = jacobi_propagator(lens, c, x)?;
    let d = 2 * lens.n();
    let q = doubled(&complement_basis(d, &[&f.x]));
    let p = q.transpose() * (DMatrix::identity(2 * d, 2 * d) - &f.matrix) * &q;
    let omega = q.transpose() * canonical_form(d) * &q;
    let nl = nullity(&p);
    if let Some(s) = nl.grey {
        return Err(Error::IndeterminateRank(s));
    }
    if nl.count != 2 * c.m() - 1 {
        return Err(Error::DegenerateFrame(format!(
            "kernel dimension {} (expected {})",
            nl.count,
            2 * c.m() - 1
        )));
    }
    let g = nl.kernel.transpose() * &omega;
    let gram = &g * g.transpose();
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::DegenerateFrame("kernel is isotropic".into()))?;
    let dual = g.transpose() * inv;
    let pv = &p * &nl.complement;
    let mut frame = DMatrix::zeros(p.nrows(), pv.ncols() + dual.ncols());
    frame.view_mut((0, 0), pv.shape()).copy_from(&pv);
    frame
        .view_mut((0, pv.ncols()), dual.shape())
        .copy_from(&dual);
    let det = frame.determinant().abs();
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::DegenerateFrame(format!("determinant {det}")));
    }
    Ok(det.powf(-0.5))
}

pub fn numeric_dg(lens: &LensSpace, c: &GeodesicComponent, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = sample_point(lens, c, &mut rng);
    numeric_dg_at(lens, c, &x)
}

/// Monte-Carlo estimate of the Sasaki volume of the component.
///
/// The sphere volume comes from hit-or-miss sampling of the unit ball
/// (`vol(S^{2m-1}) = 2m vol(B^{2m})`); the area factor of the embedding
/// `x -> (x, J x)` comes from finite-difference Jacobians at sampled points.
pub fn volume_monte_carlo(
    lens: &LensSpace,
    c: &GeodesicComponent,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = c.m();
    let dim = 2 * m;
    let hits = (0..samples)
        .filter(|_| {
            (0..dim)
                .map(|_| rng.gen_range(-1.0f64..1.0).powi(2))
                .sum::<f64>()
                <= 1.0
        })
        .count();
    let ball = 2f64.powi(dim as i32) * hits as f64 / samples as f64;
    let sphere = dim as f64 * ball;

    let d = 2 * lens.n();
    let j = j_matrix(&c.j_signs, 1);
    let embed = |x: &DVector<f64>| -> DVector<f64> { &j * x };
    let probes = 64;
    let mut factor = 0.0;
    for _ in 0..probes {
        let x = sample_point(lens, c, &mut rng);
        // tangent basis of the class sphere at x
        let mut tangent = Vec::new();
        for &i in &c.members {
            for off in 0..2 {
                let mut e = DVector::zeros(d);
                e[2 * i + off] = 1.0;
                tangent.push(e);
            }
        }
        let mut basis: Vec<DVector<f64>> = Vec::new();
        for mut e in tangent {
            e -= &x * e.dot(&x);
            for b in &basis {
                e -= b * e.dot(b);
            }
            if e.norm() > 1e-6 {
                basis.push(e.normalize());
            }
        }
        let h = 1e-6;
        let cols: Vec<DVector<f64>> = basis
            .iter()
            .map(|e| {
                let xp = (&x + e * h).normalize();
                let xm = (&x - e * h).normalize();
                let dx = (&xp - &xm) / (2.0 * h);
                let mut dv = (embed(&xp) - embed(&xm)) / (2.0 * h);
                dv -= &x * dv.dot(&x);
                let mut col = DVector::zeros(2 * d);
                col.rows_mut(0, d).copy_from(&dx);
                col.rows_mut(d, d).copy_from(&dv);
                col
            })
            .collect();
        let mat = DMatrix::from_columns(&cols);
        factor += (mat.transpose() * mat).determinant().sqrt();
    }
    factor /= probes as f64;
    sphere * factor / lens.q() as f64
}
