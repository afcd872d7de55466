//! Scattering boundary-value problem on top of a transfer matrix.
//!
//! The transfer matrix relates coefficient pairs (right-moving, left-moving)
//! at the two slab faces. A scattering state fixes the incoming halves — a
//! single plane wave on one side, nothing on the other — and in full mode
//! additionally demands that closed-channel components decay away from the
//! slab. Both incidence sides reduce to one linear solve against the
//! lower-right transfer block:
//!
//! * from the left: `M22 X = -M21 A_in`, transmitted `A_out = M11 A_in + M12 X`;
//! * from the right: `M22 X = B_in`, reflected `A_out = M12 X`.
//!
//! The incident wave is the discrete stand-in for a momentum delta: all
//! weight on one grid node, scaled so that quadrature against the singular
//! measure reproduces a unit plane wave. Outgoing coefficients with the
//! incident delta removed are, up to a constant, scattering amplitudes:
//! `f(theta) = -i / sqrt(2 pi) * c(theta)`.

use std::sync::Arc;

use ndarray::{Array1, Array2};

use crate::error::Error;
use crate::grid::{IncidenceSpec, MomentumGrid, Side};
use crate::linalg::{self, LuFactors};
use crate::operators::{BlockOperator, Mode};
use crate::transfer::TransferMatrix;
use crate::{Result, C64};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Knobs of the boundary-value solve.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Refuse solutions when the one-norm condition estimate of the
    /// lower-right transfer block exceeds this.
    pub condition_threshold: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { condition_threshold: 1e12 }
    }
}

/// Solution of one scattering boundary-value problem.
#[derive(Debug, Clone)]
pub struct ScatteringResult {
    grid: Arc<MomentumGrid>,
    mode: Mode,
    incidence: IncidenceSpec,
    /// Outgoing right-moving open coefficients at the right face, with the
    /// incident delta removed when it exits there.
    a_plus: Array1<C64>,
    /// Outgoing left-moving open coefficients at the left face, with the
    /// incident delta removed when it exits there.
    b_minus: Array1<C64>,
    /// Closed-channel tail decaying into the left half-space (full mode).
    c_minus: Option<Array1<C64>>,
    /// Closed-channel tail decaying into the right half-space (full mode).
    c_plus: Option<Array1<C64>>,
    /// Relative max-norm residual of the linear solve.
    residual: f64,
    /// One-norm condition estimate of the solved block.
    cond_m22: f64,
}

/// One outgoing direction of a scattering solution.
#[derive(Debug, Clone, Copy)]
pub struct AmplitudeSample {
    /// Physical direction angle, in `(-pi/2, 3 pi/2)`.
    pub theta: f64,
    /// Scattering amplitude.
    pub f: C64,
    /// Angular quadrature weight of this direction.
    pub weight: f64,
    /// True on the node that carried the incident delta; the unscattered
    /// wave has been removed from its coefficient.
    pub delta_excluded: bool,
}

/// Scattering amplitudes over all outgoing directions of a grid.
#[derive(Debug, Clone)]
pub struct AmplitudeSet {
    pub k: f64,
    /// Samples in ascending direction angle: the forward hemisphere
    /// (right-moving), then the backward one (left-moving).
    pub samples: Vec<AmplitudeSample>,
}

impl AmplitudeSet {
    /// Integral of `|f|^2` over all directions.
    pub fn total_cross_section(&self) -> f64 {
        self.samples.iter().map(|s| s.f.norm_sqr() * s.weight).sum()
    }

    /// The set with every direction reflected through the slab normal
    /// (`theta -> -theta`). Equals the amplitude set of the reflected
    /// potential at the reflected incidence.
    pub fn mirrored(&self) -> AmplitudeSet {
        let mut samples: Vec<AmplitudeSample> = self
            .samples
            .iter()
            .map(|s| {
                let mut theta = -s.theta;
                if theta <= -std::f64::consts::FRAC_PI_2 {
                    theta += TWO_PI;
                }
                AmplitudeSample { theta, ..*s }
            })
            .collect();
        samples.sort_by(|a, b| a.theta.partial_cmp(&b.theta).unwrap());
        AmplitudeSet { k: self.k, samples }
    }
}

/// Unit-flux incident coefficient vector: a single-node stand-in for
/// `2 pi w(p0) delta(p - p0)` under the grid quadrature.
fn incident_vector(grid: &MomentumGrid, node: usize, dim: usize) -> Array1<C64> {
    let mut a = Array1::<C64>::zeros(dim);
    a[node] = grid.kx(node) * (TWO_PI / grid.p_weight(node));
    a
}

fn factor_m22(
    m: &TransferMatrix,
    opts: &SolveOptions,
) -> Result<(LuFactors, f64)> {
    let m22 = m.block(1, 1);
    let cond = linalg::cond_1(m22)?;
    if !cond.is_finite() || cond > opts.condition_threshold {
        return Err(Error::IllConditioned { cond, threshold: opts.condition_threshold });
    }
    let lu = linalg::lu_factor(m22)?;
    Ok((lu, cond))
}

fn mat_vec(m: &Array2<C64>, v: &Array1<C64>) -> Array1<C64> {
    m.dot(v)
}

fn residual_of(m22: &Array2<C64>, x: &Array1<C64>, rhs: &Array1<C64>) -> f64 {
    let r = &mat_vec(m22, x) - rhs;
    let num = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let den = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    num / den
}

/// Solves the scattering boundary-value problem for one incident plane wave.
pub fn solve_incidence(
    m: &TransferMatrix,
    incidence: &IncidenceSpec,
    opts: &SolveOptions,
) -> Result<ScatteringResult> {
    let grid = m.grid().clone();
    let n_open = grid.n_prop();
    let dim = m.dim();
    if incidence.node >= n_open || (grid.p(incidence.node) - incidence.p0).abs() > 1e-12 * grid.k()
    {
        return Err(Error::IncidenceNodeMissing { p0: incidence.p0 });
    }
    let (lu, cond_m22) = factor_m22(m, opts)?;
    let node = incidence.node;
    let open = |x: &Array1<C64>| x.slice(ndarray::s![..n_open]).to_owned();
    let closed = |x: &Array1<C64>| {
        (m.mode() == Mode::Full).then(|| x.slice(ndarray::s![n_open..]).to_owned())
    };

    let (a_plus, b_minus, c_minus, c_plus, residual) = match incidence.side {
        Side::Left => {
            let a_in = incident_vector(&grid, node, dim);
            let rhs = mat_vec(m.block(1, 0), &a_in).mapv(|z| -z);
            let x = lu.solve_vec(&rhs);
            let residual = residual_of(m.block(1, 1), &x, &rhs);
            // outgoing right-movers, with the unscattered delta removed:
            // (M11 - 1) acts on the incident node column
            let m11 = m.block(0, 0);
            let mut out = mat_vec(m.block(0, 1), &x);
            let amp = a_in[node];
            for i in 0..dim {
                let eye = if i == node { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                out[i] += (m11[[i, node]] - eye) * amp;
            }
            (open(&out), open(&x), closed(&x), closed(&out), residual)
        }
        Side::Right => {
            let b_in = incident_vector(&grid, node, dim);
            let x = lu.solve_vec(&b_in);
            let residual = residual_of(m.block(1, 1), &x, &b_in);
            let out = mat_vec(m.block(0, 1), &x);
            // the delta exits through the left face with the transmitted wave
            let mut b_out = x.clone();
            b_out[node] -= b_in[node];
            (open(&out), open(&b_out), closed(&b_out), closed(&out), residual)
        }
    };

    Ok(ScatteringResult {
        grid,
        mode: m.mode(),
        incidence: *incidence,
        a_plus,
        b_minus,
        c_minus,
        c_plus,
        residual,
        cond_m22,
    })
}

impl ScatteringResult {
    pub fn grid(&self) -> &Arc<MomentumGrid> {
        &self.grid
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn incidence(&self) -> &IncidenceSpec {
        &self.incidence
    }

    /// Outgoing right-moving open coefficients (right face, delta removed).
    pub fn transmitted_side(&self) -> &Array1<C64> {
        &self.a_plus
    }

    /// Outgoing left-moving open coefficients (left face, delta removed).
    pub fn reflected_side(&self) -> &Array1<C64> {
        &self.b_minus
    }

    /// Closed-channel tail into the left half-space, when solved in full mode.
    pub fn left_tail(&self) -> Option<&Array1<C64>> {
        self.c_minus.as_ref()
    }

    /// Closed-channel tail into the right half-space, when solved in full mode.
    pub fn right_tail(&self) -> Option<&Array1<C64>> {
        self.c_plus.as_ref()
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn cond_m22(&self) -> f64 {
        self.cond_m22
    }

    /// Scattering amplitudes over every outgoing direction, ascending in
    /// angle: right-movers leave at `theta = q`, left-movers at
    /// `theta = pi - q`.
    pub fn amplitudes(&self) -> AmplitudeSet {
        let n = self.grid.n_prop();
        let scale = C64::new(0.0, -1.0) / TWO_PI.sqrt();
        let excluded_node = self.incidence.node;
        let excluded_forward = self.incidence.side == Side::Left;
        let mut samples = Vec::with_capacity(2 * n);
        for i in 0..n {
            samples.push(AmplitudeSample {
                theta: self.grid.param(i),
                f: scale * self.a_plus[i],
                weight: self.grid.weight(i),
                delta_excluded: excluded_forward && i == excluded_node,
            });
        }
        for i in (0..n).rev() {
            samples.push(AmplitudeSample {
                theta: std::f64::consts::PI - self.grid.param(i),
                f: scale * self.b_minus[i],
                weight: self.grid.weight(i),
                delta_excluded: !excluded_forward && i == excluded_node,
            });
        }
        AmplitudeSet { k: self.grid.k(), samples }
    }
}

/// Scattering matrix assembled from a transfer matrix: maps incoming
/// coefficient pairs `(A-, B+)` to outgoing ones `(A+, B-)`.
pub fn s_matrix(m: &TransferMatrix, opts: &SolveOptions) -> Result<BlockOperator> {
    let (lu, _cond) = factor_m22(m, opts)?;
    let m22_inv = lu.inverse();
    let x = lu.solve_mat(m.block(1, 0)); // M22^-1 M21
    let s11 = m.block(0, 0) - &m.block(0, 1).dot(&x);
    let s12 = m.block(0, 1).dot(&m22_inv);
    let s21 = x.mapv(|z| -z);
    let s22 = m22_inv;
    Ok(BlockOperator::from_blocks(m.grid(), m.mode(), [s11, s12, s21, s22]))
}
