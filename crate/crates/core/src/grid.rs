//! Momentum discretization of the channel space.
//!
//! Open (propagating) channels `|p| < k` are parametrized by the angle
//! substitution `p = k sin(q)`, `q` in `(-pi/2, pi/2)`, under which the
//! singular channel measure becomes flat: `dp / w(p) = dq` with
//! `w = sqrt(k^2 - p^2)`. Closed (evanescent) channels are parametrized per
//! sign by `|p| = k cosh(s)`, `s` in `(0, arccosh(lambda/k))`, for which
//! `dp / |w| = ds`. Gauss–Legendre nodes in the substitution variables then
//! give interior nodes (never grazing, `|p| = k` is excluded by
//! construction) and positive weights, and integrals against `dp / w`
//! reduce to plain weight sums.
//!
//! Incidence angles must coincide with grid nodes so that the incident
//! delta has an exact discrete representative. The builder therefore
//! accepts a list of angles and lays out composite panels: each requested
//! angle receives an odd-order Gauss–Legendre panel centered on it (odd
//! rules place their middle node exactly at the center), and the remaining
//! stretches are covered proportionally. When the requested angles are
//! symmetric under `q -> -q` the construction is mirrored bit for bit, so
//! reflection maps can permute nodes exactly.

use crate::error::Error;
use crate::quad::{gauss_legendre, map_to};
use crate::{Result, C64};

use std::f64::consts::{FRAC_PI_2, PI};

/// Longitudinal wavenumber of channel `p`: `sqrt(k^2 - p^2)` for open
/// channels, analytically continued to `i sqrt(p^2 - k^2)` for closed ones.
pub fn longitudinal(k: f64, p: f64) -> C64 {
    if p.abs() < k {
        C64::new((k * k - p * p).sqrt(), 0.0)
    } else {
        C64::new(0.0, (p * p - k * k).sqrt())
    }
}

/// Channel classification of a grid node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Propagating,
    Evanescent,
}

/// Which face of the slab the incident wave enters through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Incoming from `x < a_minus`, direction angle in `(-pi/2, pi/2)`.
    Left,
    /// Incoming from `x > a_plus`, direction angle in `(pi/2, 3 pi/2)`.
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// Transverse momentum at a grid angle, computed sign-symmetrically so that
/// mirrored angles yield exactly negated momenta.
fn transverse(k: f64, q: f64) -> f64 {
    (k * q.abs().sin()).copysign(q)
}

fn longitudinal_at_angle(k: f64, q: f64) -> f64 {
    k * q.abs().cos()
}

/// One contiguous Gauss–Legendre panel in a substitution variable. When the
/// panel exists to pin an inserted angle, `center` carries that angle
/// exactly; node generation maps around it so the middle node of an odd
/// panel reproduces it bitwise (the rounded midpoint of the panel edges
/// generally would not).
#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    count: usize,
    center: Option<f64>,
}

fn round_odd(x: f64) -> usize {
    let n = ((x - 1.0) / 2.0).round() as i64 * 2 + 1;
    n.max(3) as usize
}

/// Lays out panels over `(-pi/2, pi/2)` so each inserted angle is the exact
/// center of an odd panel.
fn angle_panels(n: usize, inserts: &[f64]) -> Result<Vec<Panel>> {
    if inserts.is_empty() {
        return Ok(vec![Panel { a: -FRAC_PI_2, b: FRAC_PI_2, count: n, center: None }]);
    }
    let m = inserts.len();
    if n < 6 * (m + 1) {
        return Err(Error::InvalidParameter(format!(
            "{n} propagating nodes are too few for {m} inserted angles; need at least {}",
            6 * (m + 1)
        )));
    }
    // cell boundaries: midpoints between consecutive inserted angles
    let mut edges = Vec::with_capacity(m + 1);
    edges.push(-FRAC_PI_2);
    for pair in inserts.windows(2) {
        edges.push(0.5 * (pair[0] + pair[1]));
    }
    edges.push(FRAC_PI_2);
    // center panel of each insert: half the distance to the nearer edge
    let mut half = Vec::with_capacity(m);
    for (i, &q) in inserts.iter().enumerate() {
        half.push(0.5 * (q - edges[i]).min(edges[i + 1] - q));
    }
    let mut spans = Vec::with_capacity(2 * m + 1);
    spans.push((edges[0], inserts[0] - half[0], None));
    for i in 0..m {
        spans.push((inserts[i] - half[i], inserts[i] + half[i], Some(inserts[i])));
        let right_edge = if i + 1 < m { inserts[i + 1] - half[i + 1] } else { edges[m] };
        spans.push((inserts[i] + half[i], right_edge, None));
    }
    let mut panels = Vec::with_capacity(spans.len());
    for (a, b, center) in spans {
        let raw = n as f64 * (b - a) / PI;
        let count =
            if center.is_some() { round_odd(raw) } else { (raw.round() as usize).max(2) };
        panels.push(Panel { a, b, count, center });
    }
    Ok(panels)
}

/// Discretized channel space: propagating nodes first (ascending `p`), then
/// the evanescent extension if one was requested (ascending `p`, i.e. the
/// negative branch followed by the positive one).
#[derive(Debug, Clone)]
pub struct MomentumGrid {
    k: f64,
    n_prop: usize,
    n_ev_side: usize,
    lambda: Option<f64>,
    inserted: Vec<f64>,
    /// substitution parameter of each node: angle `q` or decay parameter `s`
    param: Vec<f64>,
    p: Vec<f64>,
    kx: Vec<C64>,
    /// weight in the substitution variable (the `dp / w` measure)
    w: Vec<f64>,
    /// weight in the plain `dp` measure: `|kx| * w`
    pw: Vec<f64>,
}

impl MomentumGrid {
    /// Builds the open-channel grid. `inserts` are grid angles in
    /// `(-pi/2, pi/2)` that must appear as exact nodes (map a physical
    /// incidence with [`IncidenceSpec::grid_angle`]).
    pub fn propagating(k: f64, n: usize, inserts: &[f64]) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidParameter("wavenumber k must be positive".into()));
        }
        if n < 8 {
            return Err(Error::InvalidParameter("need at least 8 propagating nodes".into()));
        }
        let mut sorted: Vec<f64> = inserts.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        if sorted.iter().any(|q| q.abs() >= FRAC_PI_2) {
            return Err(Error::InvalidParameter(
                "inserted angles must lie strictly inside (-pi/2, pi/2)".into(),
            ));
        }

        let panels = angle_panels(n, &sorted)?;
        let mut param = Vec::new();
        let mut w = Vec::new();
        for panel in &panels {
            let (t, omega) = gauss_legendre(panel.count);
            // map around the pinned center when there is one, so the middle
            // node of the odd panel lands on it bitwise
            let mid = panel.center.unwrap_or(0.5 * (panel.a + panel.b));
            let half = 0.5 * (panel.b - panel.a);
            for (&ti, &wi) in t.iter().zip(&omega) {
                param.push(mid + half * ti);
                w.push(half * wi);
            }
        }
        // mirror the layout exactly when the inserted set is symmetric, so
        // that p -> -p is an exact node permutation
        let n_nodes = param.len();
        let symmetric_layout = sorted
            .iter()
            .zip(sorted.iter().rev())
            .all(|(a, b)| (a + b).abs() <= 1e-12);
        if symmetric_layout {
            for i in 0..n_nodes / 2 {
                param[i] = -param[n_nodes - 1 - i];
                w[i] = w[n_nodes - 1 - i];
            }
            if n_nodes % 2 == 1 && sorted.len() % 2 == 1 {
                param[n_nodes / 2] = 0.0;
            }
        }

        let mut grid = MomentumGrid {
            k,
            n_prop: n_nodes,
            n_ev_side: 0,
            lambda: None,
            inserted: sorted,
            param: Vec::new(),
            p: Vec::new(),
            kx: Vec::new(),
            w: Vec::new(),
            pw: Vec::new(),
        };
        for (&q, &wq) in param.iter().zip(&w) {
            let p = transverse(k, q);
            let kx = longitudinal_at_angle(k, q);
            grid.param.push(q);
            grid.p.push(p);
            grid.kx.push(C64::new(kx, 0.0));
            grid.w.push(wq);
            grid.pw.push(kx * wq);
        }
        Ok(grid)
    }

    /// Builds the extended grid: open channels as in [`Self::propagating`]
    /// plus `n_ev` closed channels per sign of `p`, reaching out to the
    /// momentum cutoff `lambda > k`.
    pub fn extended(k: f64, n: usize, n_ev: usize, lambda: f64, inserts: &[f64]) -> Result<Self> {
        let mut grid = Self::propagating(k, n, inserts)?;
        if n_ev < 4 {
            return Err(Error::InvalidParameter("need at least 4 evanescent nodes per side".into()));
        }
        if !(lambda > k) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(
                "evanescent cutoff lambda must exceed the wavenumber k".into(),
            ));
        }
        let s_max = (lambda / k).acosh();
        let (t, omega) = gauss_legendre(n_ev);
        let (s, ws) = map_to(&t, &omega, 0.0, s_max);
        // negative branch: descending s gives ascending p = -k cosh(s)
        for (&si, &wi) in s.iter().rev().zip(ws.iter().rev()) {
            grid.push_evanescent(-1.0, si, wi);
        }
        for (&si, &wi) in s.iter().zip(&ws) {
            grid.push_evanescent(1.0, si, wi);
        }
        grid.n_ev_side = n_ev;
        grid.lambda = Some(lambda);
        Ok(grid)
    }

    fn push_evanescent(&mut self, sign: f64, s: f64, ws: f64) {
        let k = self.k;
        let decay = k * s.sinh();
        self.param.push(s);
        self.p.push(sign * k * s.cosh());
        self.kx.push(C64::new(0.0, decay));
        self.w.push(ws);
        self.pw.push(decay * ws);
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Total number of channels (propagating plus evanescent).
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn n_prop(&self) -> usize {
        self.n_prop
    }

    /// Closed channels per sign of `p`.
    pub fn n_ev_side(&self) -> usize {
        self.n_ev_side
    }

    pub fn has_extension(&self) -> bool {
        self.n_ev_side > 0
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    /// Grid angles that were requested as exact nodes.
    pub fn inserted_angles(&self) -> &[f64] {
        &self.inserted
    }

    pub fn channel(&self, i: usize) -> Channel {
        if i < self.n_prop {
            Channel::Propagating
        } else {
            Channel::Evanescent
        }
    }

    pub fn p(&self, i: usize) -> f64 {
        self.p[i]
    }

    /// Longitudinal wavenumber of node `i` (real for open channels, positive
    /// imaginary for closed ones), consistent with the node parametrization.
    pub fn kx(&self, i: usize) -> C64 {
        self.kx[i]
    }

    /// Quadrature weight in the substitution variable; sums to `pi` over the
    /// open channels and to `2 arccosh(lambda/k)` over the closed ones.
    pub fn weight(&self, i: usize) -> f64 {
        self.w[i]
    }

    /// Quadrature weight in the plain `dp` measure.
    pub fn p_weight(&self, i: usize) -> f64 {
        self.pw[i]
    }

    /// Substitution parameter of node `i`: the angle `q` for open channels,
    /// the decay parameter `s` for closed ones.
    pub fn param(&self, i: usize) -> f64 {
        self.param[i]
    }

    pub fn ps(&self) -> &[f64] {
        &self.p
    }

    /// True when `p -> -p` maps every node onto another node exactly.
    pub fn is_symmetric(&self) -> bool {
        self.mirror_perm().is_ok()
    }

    /// Node permutation realizing `p -> -p`, or an error when the grid was
    /// not built with a mirror-symmetric layout.
    pub fn mirror_perm(&self) -> Result<Vec<usize>> {
        let mut perm = vec![0usize; self.len()];
        let blocks = [(0, self.n_prop), (self.n_prop, self.len())];
        for &(lo, hi) in &blocks {
            for i in lo..hi {
                let j = lo + (hi - 1 - i);
                if self.p[j] != -self.p[i] {
                    return Err(Error::AsymmetricGrid);
                }
                perm[i] = j;
            }
        }
        Ok(perm)
    }
}

/// A validated incident plane wave: side, direction, and the grid node
/// carrying its transverse momentum.
#[derive(Debug, Clone, Copy)]
pub struct IncidenceSpec {
    pub side: Side,
    /// Physical direction angle.
    pub theta0: f64,
    /// Angle of the node in the grid parametrization.
    pub grid_angle: f64,
    /// Transverse momentum `k sin(theta0)`.
    pub p0: f64,
    /// Index of the carrying node in the propagating block.
    pub node: usize,
}

impl IncidenceSpec {
    /// Maps a physical incidence angle to the grid angle whose node carries
    /// it. Left incidences use the angle directly; right incidences come in
    /// on the reversed branch, `q = pi - theta0`.
    pub fn grid_angle(side: Side, theta0: f64) -> Result<f64> {
        match side {
            Side::Left => {
                if theta0 > -FRAC_PI_2 && theta0 < FRAC_PI_2 {
                    Ok(theta0)
                } else {
                    Err(Error::ThetaOutOfRange {
                        side: "left",
                        theta0,
                        interval: "(-pi/2, pi/2)",
                    })
                }
            }
            Side::Right => {
                if theta0 > FRAC_PI_2 && theta0 < 3.0 * FRAC_PI_2 {
                    Ok(PI - theta0)
                } else {
                    Err(Error::ThetaOutOfRange {
                        side: "right",
                        theta0,
                        interval: "(pi/2, 3 pi/2)",
                    })
                }
            }
        }
    }

    /// Binds an incidence to its grid node; the grid must have been built
    /// with this angle inserted.
    pub fn new(grid: &MomentumGrid, side: Side, theta0: f64) -> Result<Self> {
        let q = Self::grid_angle(side, theta0)?;
        let p0 = transverse(grid.k(), q);
        let node = (0..grid.n_prop())
            .find(|&i| grid.p(i) == p0)
            .or_else(|| {
                (0..grid.n_prop()).find(|&i| (grid.p(i) - p0).abs() <= 1e-12 * grid.k())
            })
            .ok_or(Error::IncidenceNodeMissing { p0 })?;
        Ok(IncidenceSpec { side, theta0, grid_angle: q, p0: grid.p(node), node })
    }
}
