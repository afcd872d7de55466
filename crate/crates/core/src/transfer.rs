//! Propagation of the block transfer matrix across the slab.
//!
//! The fundamental solution `U(x, x0)` of the transfer ODE
//! `i U' = H(x) U`, `U(x0, x0) = 1`, evaluated at the far face, maps wave
//! coefficients on the left of the slab to those on the right. Three routes
//! are provided:
//!
//! * [`Method::Ode`] — adaptive embedded Runge–Kutta (Dormand–Prince 5(4)),
//!   the workhorse;
//! * [`Method::Dyson`]`(n)` — the iterated-integral series truncated at
//!   order `n`, realized by running cumulative quadrature over composite
//!   Gauss–Legendre panels once per order (each order is the running
//!   integral of the generator applied to the previous one);
//! * [`born_transfer`] — the first-order series on the open channels only,
//!   with the position integral done by adaptive quadrature.
//!
//! Potentials concentrated on a single plane have an exact one-step
//! propagator, [`delta_x_transfer`]: the generator at coincident positions
//! is nilpotent in its two-component structure, so the exponential
//! terminates after the linear term. [`evolve`] dispatches there
//! automatically for that family.
//!
//! Closed channels carry factors `exp(|kx| dx)` in the generator, so
//! full-mode propagation over thick slabs is exponentially ill-conditioned.
//! A guard refuses full-mode evolution when `cutoff * interval` exceeds a
//! configurable bound; split the slab and [`compose`] the sections instead.

use std::sync::Arc;

use ndarray::{Array1, Array2};

use crate::error::Error;
use crate::grid::MomentumGrid;
use crate::operators::{self, BlockOperator, Mode};
use crate::potentials::Potential;
use crate::quad::{cumulative_matrix, gauss_legendre, map_to};
use crate::{Result, C64};

/// How a transfer matrix was (or should be) produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Adaptive Dormand–Prince 5(4) integration of the transfer ODE.
    Ode,
    /// Iterated-integral series truncated at the given order.
    Dyson(usize),
    /// First order in the potential, open channels only.
    Born,
    /// Exact one-step propagation through a delta plane.
    ClosedForm,
    /// Product of previously computed sections.
    Composite,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Ode => write!(f, "ode"),
            Method::Dyson(n) => write!(f, "dyson({n})"),
            Method::Born => write!(f, "born"),
            Method::ClosedForm => write!(f, "closed_form"),
            Method::Composite => write!(f, "composite"),
        }
    }
}

/// Tunable knobs of the propagation routines.
#[derive(Debug, Clone)]
pub struct EvolveOptions {
    /// Target accuracy of the propagated matrix. The embedded-pair step
    /// control runs tighter than this so that the accumulated global error
    /// stays within the target.
    pub rtol: f64,
    /// Hard cap on accepted ODE steps.
    pub max_steps: usize,
    /// Full-mode refusal threshold on `cutoff * interval` (closed channels
    /// grow like `exp` of that product).
    pub stiffness_guard: f64,
    /// Composite panels for the iterated-series quadrature.
    pub dyson_panels: usize,
    /// Gauss–Legendre points per series panel.
    pub dyson_points: usize,
    /// Relative tolerance of the first-order position integral.
    pub born_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            rtol: 1e-10,
            max_steps: 1_000_000,
            stiffness_guard: 40.0,
            dyson_panels: 16,
            dyson_points: 8,
            born_tol: 1e-10,
        }
    }
}

/// Block transfer matrix of a slab section `[x0, x1]`.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    op: BlockOperator,
    x0: f64,
    x1: f64,
    method: Method,
}

impl TransferMatrix {
    pub fn op(&self) -> &BlockOperator {
        &self.op
    }

    pub fn block(&self, r: usize, c: usize) -> &Array2<C64> {
        self.op.block(r, c)
    }

    pub fn grid(&self) -> &Arc<MomentumGrid> {
        self.op.grid()
    }

    pub fn mode(&self) -> Mode {
        self.op.mode()
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.x0, self.x1)
    }

    /// Channels per component.
    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

/// Restriction of a full-mode transfer matrix to the open channels: the
/// reference against which the propagating-wave approximation is judged.
pub fn project_transfer(m: &TransferMatrix) -> Result<TransferMatrix> {
    Ok(TransferMatrix {
        op: m.op.project()?,
        x0: m.x0,
        x1: m.x1,
        method: m.method,
    })
}

/// Product of adjacent sections: `later` must start where `earlier` ends.
pub fn compose(later: &TransferMatrix, earlier: &TransferMatrix) -> Result<TransferMatrix> {
    let gap = (later.x0 - earlier.x1).abs();
    if gap > 1e-12 * (1.0 + later.x0.abs().max(earlier.x1.abs())) {
        return Err(Error::IntervalMismatch {
            left_end: earlier.x1,
            right_start: later.x0,
        });
    }
    Ok(TransferMatrix {
        op: later.op.dot(&earlier.op)?,
        x0: earlier.x0,
        x1: later.x1,
        method: if later.method == earlier.method { later.method } else { Method::Composite },
    })
}

/// Cached separable structure of the generator: everything except the
/// longitudinal profile `g(x)` and the position phases.
struct Prepared<'a> {
    v: &'a Potential,
    n: usize,
    /// spectral kernel over the longitudinal wavenumber (no `g`, no 1/2)
    c0: Array2<C64>,
    kx: Vec<C64>,
}

fn prepare<'a>(v: &'a Potential, grid: &'a MomentumGrid, mode: Mode) -> Result<Prepared<'a>> {
    let n = mode.dim(grid)?;
    Ok(Prepared {
        v,
        n,
        c0: operators::spectral_over_kx(v, grid, mode)?,
        kx: (0..n).map(|i| grid.kx(i)).collect(),
    })
}

impl Prepared<'_> {
    fn phases(&self, x: f64) -> (Array1<C64>, Array1<C64>) {
        let plus = Array1::from_iter(self.kx.iter().map(|&kx| (kx * C64::new(0.0, x)).exp()));
        let minus = Array1::from_iter(self.kx.iter().map(|&kx| (kx * C64::new(0.0, -x)).exp()));
        (plus, minus)
    }

    /// `out = -i H(x) m` for a stacked two-component matrix `m` (2n rows).
    /// The rank-one component structure reduces the application to one
    /// kernel product of width `m.ncols()`.
    fn apply_neg_i_h(&self, x: f64, m: &Array2<C64>) -> Array2<C64> {
        let n = self.n;
        let cols = m.ncols();
        // interior-limit variant: ODE stages hit the support faces bitwise,
        // and the stepper needs the smooth (almost-everywhere) integrand there
        let g = self.v.x_profile_interior(x);
        if g == 0.0 {
            return Array2::zeros((2 * n, cols));
        }
        let (ep, em) = self.phases(x);
        let mut z = Array2::<C64>::zeros((n, cols));
        for i in 0..n {
            let (pi, mi) = (ep[i], em[i]);
            let top = m.row(i);
            let bot = m.row(n + i);
            let mut zi = z.row_mut(i);
            for c in 0..cols {
                zi[c] = pi * top[c] + mi * bot[c];
            }
        }
        let y = self.c0.dot(&z);
        let mut out = Array2::<C64>::zeros((2 * n, cols));
        let scale = C64::new(0.0, -0.5 * g);
        for i in 0..n {
            let st = scale * em[i];
            let sb = -scale * ep[i];
            let yi = y.row(i);
            let mut ot = out.row_mut(i);
            for c in 0..cols {
                ot[c] = st * yi[c];
            }
            let mut ob = out.row_mut(n + i);
            for c in 0..cols {
                ob[c] = sb * yi[c];
            }
        }
        out
    }

    /// Dense `2n x 2n` generator at `x`.
    fn dense(&self, x: f64) -> Array2<C64> {
        let n = self.n;
        let mut out = Array2::<C64>::zeros((2 * n, 2 * n));
        let g = self.v.x_profile_interior(x);
        if g == 0.0 {
            return out;
        }
        let (ep, em) = self.phases(x);
        for i in 0..n {
            let rt = em[i] * 0.5 * g;
            let rb = -(ep[i] * 0.5 * g);
            for j in 0..n {
                let cij = self.c0[[i, j]];
                out[[i, j]] = rt * cij * ep[j];
                out[[i, n + j]] = rt * cij * em[j];
                out[[n + i, j]] = rb * cij * ep[j];
                out[[n + i, n + j]] = rb * cij * em[j];
            }
        }
        out
    }
}

// Dormand–Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
/// fifth-order weights minus the embedded fourth-order ones
const ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Integrates `U' = -i H(x) U` from `x0` to `x1` starting at the identity.
fn ode_fundamental(
    pre: &Prepared,
    x0: f64,
    x1: f64,
    opts: &EvolveOptions,
) -> Result<Array2<C64>> {
    let n2 = 2 * pre.n;
    let mut u = Array2::<C64>::eye(n2);
    if x1 == x0 {
        return Ok(u);
    }
    let width = x1 - x0;
    // error-per-unit-step control: local errors are held proportional to
    // the step fraction of the interval, so their sum — the global error —
    // lands near the requested accuracy (with a small safety margin)
    let tol = (opts.rtol / 4.0).max(1e-15);
    let mut x = x0;
    let mut h = width / 16.0;
    let mut k1 = pre.apply_neg_i_h(x, &u);
    let mut steps = 0usize;
    while x < x1 {
        if steps >= opts.max_steps {
            return Err(Error::EvanescentStiffness {
                severity: f64::NAN,
                guard: opts.max_steps as f64,
                detail: "step budget exhausted",
            });
        }
        steps += 1;
        let h_used = if x + h > x1 { x1 - x } else { h };
        let hc = C64::new(h_used, 0.0);
        let k2 = pre.apply_neg_i_h(x + h_used / 5.0, &(&u + &(&k1 * (hc * A2[0]))));
        let mut stage = u.clone();
        stage.scaled_add(hc * A3[0], &k1);
        stage.scaled_add(hc * A3[1], &k2);
        let k3 = pre.apply_neg_i_h(x + 3.0 * h_used / 10.0, &stage);
        let mut stage = u.clone();
        stage.scaled_add(hc * A4[0], &k1);
        stage.scaled_add(hc * A4[1], &k2);
        stage.scaled_add(hc * A4[2], &k3);
        let k4 = pre.apply_neg_i_h(x + 4.0 * h_used / 5.0, &stage);
        let mut stage = u.clone();
        stage.scaled_add(hc * A5[0], &k1);
        stage.scaled_add(hc * A5[1], &k2);
        stage.scaled_add(hc * A5[2], &k3);
        stage.scaled_add(hc * A5[3], &k4);
        let k5 = pre.apply_neg_i_h(x + 8.0 * h_used / 9.0, &stage);
        let mut stage = u.clone();
        stage.scaled_add(hc * A6[0], &k1);
        stage.scaled_add(hc * A6[1], &k2);
        stage.scaled_add(hc * A6[2], &k3);
        stage.scaled_add(hc * A6[3], &k4);
        stage.scaled_add(hc * A6[4], &k5);
        let k6 = pre.apply_neg_i_h(x + h_used, &stage);
        let mut u_new = u.clone();
        u_new.scaled_add(hc * B5[0], &k1);
        u_new.scaled_add(hc * B5[2], &k3);
        u_new.scaled_add(hc * B5[3], &k4);
        u_new.scaled_add(hc * B5[4], &k5);
        u_new.scaled_add(hc * B5[5], &k6);
        let k7 = pre.apply_neg_i_h(x + h_used, &u_new);
        let mut err_mat = &k1 * (hc * ERR[0]);
        err_mat.scaled_add(hc * ERR[2], &k3);
        err_mat.scaled_add(hc * ERR[3], &k4);
        err_mat.scaled_add(hc * ERR[4], &k5);
        err_mat.scaled_add(hc * ERR[5], &k6);
        err_mat.scaled_add(hc * ERR[6], &k7);
        let err = max_abs(&err_mat);
        let scale = tol * (h_used / width) * max_abs(&u).max(max_abs(&u_new)).max(1.0);
        if err <= scale {
            x += h_used;
            u = u_new;
            k1 = k7;
            if x >= x1 {
                break;
            }
            // err ~ h^5 against a target ~ h: effective order four
            let grow = if err == 0.0 { 5.0 } else { (0.9 * (scale / err).powf(0.25)).min(5.0) };
            h = h_used * grow;
        } else {
            h = h_used * (0.9 * (scale / err).powf(0.25)).max(0.2);
            if h < width * 1e-14 {
                return Err(Error::EvanescentStiffness {
                    severity: f64::NAN,
                    guard: opts.stiffness_guard,
                    detail: "step size underflow",
                });
            }
        }
    }
    Ok(u)
}

/// Runs the stepper over each smooth piece of `[x0, x1]` — cut at the
/// profile knots — and chains the factors.  Pieces on which the potential
/// vanishes contribute the identity exactly and are skipped; the remaining
/// pieces have a smooth integrand, which the error controller requires (a
/// jump inside a step makes the local error scale like the step itself, and
/// no step size satisfies a per-unit-step target then).
fn ode_piecewise(pre: &Prepared, x0: f64, x1: f64, opts: &EvolveOptions) -> Result<Array2<C64>> {
    let n2 = 2 * pre.n;
    let mut edges = vec![x0];
    let mut cuts: Vec<f64> =
        pre.v.x_breakpoints().into_iter().filter(|&c| c > x0 && c < x1).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.extend(cuts);
    edges.push(x1);
    let mut u = Array2::<C64>::eye(n2);
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        // between knots the profile is analytic (constant, one Hann arch, or
        // linear), so vanishing at three interior points means vanishing on
        // the whole piece
        let probe = |t: f64| pre.v.x_profile(lo + (hi - lo) * t);
        if probe(0.25) == 0.0 && probe(0.5) == 0.0 && probe(0.75) == 0.0 {
            continue;
        }
        let piece = ode_fundamental(pre, lo, hi, opts)?;
        u = piece.dot(&u);
    }
    Ok(u)
}

/// Iterated-integral series: each order is the cumulative integral of the
/// generator applied to the previous order, evaluated on composite
/// Gauss–Legendre panels with a spectral cumulative-integration matrix.
fn dyson_fundamental(
    pre: &Prepared,
    x0: f64,
    x1: f64,
    order: usize,
    opts: &EvolveOptions,
) -> Result<Array2<C64>> {
    let n2 = 2 * pre.n;
    let mut total = Array2::<C64>::eye(n2);
    if order == 0 || x1 == x0 {
        return Ok(total);
    }
    let panels = opts.dyson_panels.max(2);
    let q = opts.dyson_points.max(4);
    let (t, w) = gauss_legendre(q);
    let s_ref = cumulative_matrix(&t, &w);
    let mut xs = Vec::with_capacity(panels * q);
    let mut half = Vec::with_capacity(panels);
    for pnl in 0..panels {
        let a = x0 + (x1 - x0) * pnl as f64 / panels as f64;
        let b = x0 + (x1 - x0) * (pnl + 1) as f64 / panels as f64;
        let (px, _) = map_to(&t, &w, a, b);
        xs.extend(px);
        half.push(0.5 * (b - a));
    }
    // running order, evaluated at every node; starts at the identity
    let mut cur: Vec<Array2<C64>> = (0..panels * q).map(|_| Array2::eye(n2)).collect();
    for _ in 1..=order {
        let mut carry = Array2::<C64>::zeros((n2, n2));
        for pnl in 0..panels {
            let g: Vec<Array2<C64>> = (0..q)
                .map(|b| pre.apply_neg_i_h(xs[pnl * q + b], &cur[pnl * q + b]))
                .collect();
            let h = half[pnl];
            for a in 0..q {
                let mut next = carry.clone();
                for (b, gb) in g.iter().enumerate() {
                    next.scaled_add(C64::new(h * s_ref[[a, b]], 0.0), gb);
                }
                cur[pnl * q + a] = next;
            }
            for (b, gb) in g.iter().enumerate() {
                carry.scaled_add(C64::new(h * w[b], 0.0), gb);
            }
        }
        total += &carry;
        // the final value of this order seeds the next one via `cur`
    }
    Ok(total)
}

fn guard_full_mode(grid: &MomentumGrid, mode: Mode, x0: f64, x1: f64, opts: &EvolveOptions) -> Result<()> {
    if mode == Mode::Full {
        if let Some(lambda) = grid.lambda() {
            let severity = lambda * (x1 - x0);
            if severity > opts.stiffness_guard {
                return Err(Error::EvanescentStiffness {
                    severity,
                    guard: opts.stiffness_guard,
                    detail: "full-mode interval too thick for the cutoff",
                });
            }
        }
    }
    Ok(())
}

/// Propagates the transfer matrix across `[x0, x1]`.
pub fn evolve_interval(
    v: &Potential,
    grid: &Arc<MomentumGrid>,
    mode: Mode,
    method: Method,
    x0: f64,
    x1: f64,
    opts: &EvolveOptions,
) -> Result<TransferMatrix> {
    if !(x1 >= x0) {
        return Err(Error::InvalidParameter("evolution interval must have x1 >= x0".into()));
    }
    if v.is_delta_x() {
        let a = v.support().0;
        if x0 <= a && a <= x1 {
            let mut m = delta_x_transfer(v, grid, mode)?;
            m.x0 = x0;
            m.x1 = x1;
            return Ok(m);
        }
        let op = BlockOperator::identity(grid, mode)?;
        return Ok(TransferMatrix { op, x0, x1, method: Method::ClosedForm });
    }
    guard_full_mode(grid, mode, x0, x1, opts)?;
    match method {
        Method::Ode => {
            let pre = prepare(v, grid, mode)?;
            let dense = ode_piecewise(&pre, x0, x1, opts)?;
            let op = BlockOperator::from_dense(grid, mode, &dense)?;
            Ok(TransferMatrix { op, x0, x1, method })
        }
        Method::Dyson(order) => {
            let pre = prepare(v, grid, mode)?;
            let dense = dyson_fundamental(&pre, x0, x1, order, opts)?;
            let op = BlockOperator::from_dense(grid, mode, &dense)?;
            Ok(TransferMatrix { op, x0, x1, method })
        }
        Method::Born => {
            if mode != Mode::Propagating {
                return Err(Error::ModeMismatch { expected: "propagating", found: mode.name() });
            }
            born_interval(v, grid, x0, x1, opts)
        }
        Method::ClosedForm => Err(Error::WrongFamily {
            expected: "delta_x_slab",
            found: v.family().name(),
        }),
        Method::Composite => Err(Error::InvalidParameter(
            "composite is a result tag, not an evolution method".into(),
        )),
    }
}

/// Propagates across the whole slab support.
pub fn evolve(
    v: &Potential,
    grid: &Arc<MomentumGrid>,
    mode: Mode,
    method: Method,
    opts: &EvolveOptions,
) -> Result<TransferMatrix> {
    let (a, b) = v.support();
    evolve_interval(v, grid, mode, method, a, b, opts)
}

/// Exact propagator through a potential concentrated on one plane: the
/// two-component structure of the generator is nilpotent at coincident
/// positions, so `exp(-i H) = 1 - i H` terminates exactly.
pub fn delta_x_transfer(
    v: &Potential,
    grid: &Arc<MomentumGrid>,
    mode: Mode,
) -> Result<TransferMatrix> {
    if !v.is_delta_x() {
        return Err(Error::WrongFamily {
            expected: "delta_x_slab",
            found: v.family().name(),
        });
    }
    let a = v.support().0;
    let n = mode.dim(grid)?;
    let c0 = operators::spectral_over_kx(v, grid, mode)?;
    let ep = operators::phase_diag(grid, n, a, 1.0);
    let em = operators::phase_diag(grid, n, a, -1.0);
    let mut op = BlockOperator::identity(grid, mode)?;
    let half_i = C64::new(0.0, 0.5);
    for i in 0..n {
        let rt = -half_i * em[i];
        let rb = half_i * ep[i];
        for j in 0..n {
            let cij = c0[[i, j]];
            op.block_mut(0, 0)[[i, j]] += rt * cij * ep[j];
            op.block_mut(0, 1)[[i, j]] += rt * cij * em[j];
            op.block_mut(1, 0)[[i, j]] += rb * cij * ep[j];
            op.block_mut(1, 1)[[i, j]] += rb * cij * em[j];
        }
    }
    Ok(TransferMatrix { op, x0: a, x1: a, method: Method::ClosedForm })
}

fn born_interval(
    v: &Potential,
    grid: &Arc<MomentumGrid>,
    x0: f64,
    x1: f64,
    opts: &EvolveOptions,
) -> Result<TransferMatrix> {
    let pre = prepare(v, grid, Mode::Propagating)?;
    let n2 = 2 * pre.n;
    let mut integrand = |x: f64| pre.dense(x);
    let integral = crate::quad::adaptive_matrix(
        &mut integrand,
        x0,
        x1,
        opts.born_tol,
        &v.x_breakpoints(),
        (n2, n2),
    );
    let mut dense = Array2::<C64>::eye(n2);
    dense.scaled_add(C64::new(0.0, -1.0), &integral);
    let op = BlockOperator::from_dense(grid, Mode::Propagating, &dense)?;
    Ok(TransferMatrix { op, x0, x1, method: Method::Born })
}

/// First order in the potential on the open channels: the identity minus
/// `i` times the position integral of the generator. For the delta-plane
/// family this coincides with the exact one-step propagator and is returned
/// from the same closed form.
pub fn born_transfer(
    v: &Potential,
    grid: &Arc<MomentumGrid>,
    opts: &EvolveOptions,
) -> Result<TransferMatrix> {
    if v.is_delta_x() {
        let mut m = delta_x_transfer(v, grid, Mode::Propagating)?;
        m.method = Method::Born;
        return Ok(m);
    }
    let (a, b) = v.support();
    born_interval(v, grid, a, b, opts)
}
