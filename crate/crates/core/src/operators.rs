//! Channel-space operators.
//!
//! On a grid of transverse momenta, the potential acts by convolution: the
//! kernel entry coupling channel `p_j` to `p_i` is
//! `vt(x, p_i - p_j) / (2 pi)` times the quadrature weight of `p_j` in the
//! plain momentum measure (weights are folded into columns, so operators
//! act on vectors of plain samples). Restricting rows and columns to the
//! open or closed channels yields the four physically distinct blocks: the
//! open-channel kernel used by the propagating-wave approximation, the
//! closed-channel kernel, and the two cross couplings whose neglect the
//! approximation is built on.
//!
//! The transfer ODE works on two wave components per channel (right- and
//! left-moving, `exp(+i w x)` and `exp(-i w x)`). Its generator is assembled
//! here as a [`BlockOperator`]: writing `C(x) = v(x) * 1/kx` for the
//! convolution kernel divided by the longitudinal wavenumber and
//! `E(x) = diag(exp(i kx x))`, the four blocks are
//!
//! ```text
//!   [  E* C E / 2    E* C E* / 2 ]
//!   [ -E  C E / 2   -E  C E* / 2 ]
//! ```
//!
//! a rank-one pattern in the component space (both columns equal up to
//! sign) that the propagation module exploits to apply the generator with
//! a single matrix product.

use std::sync::Arc;

use ndarray::{s, Array1, Array2};

use crate::error::Error;
use crate::grid::MomentumGrid;
use crate::linalg;
use crate::potentials::Potential;
use crate::{Result, C64};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Channel content of block operators: open channels only (the
/// propagating-wave approximation) or open plus closed channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Propagating,
    Full,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Propagating => "propagating",
            Mode::Full => "full",
        }
    }

    /// Number of channels this mode spans on `grid`.
    pub fn dim(self, grid: &MomentumGrid) -> Result<usize> {
        match self {
            Mode::Propagating => Ok(grid.n_prop()),
            Mode::Full => {
                if grid.has_extension() {
                    Ok(grid.len())
                } else {
                    Err(Error::NoEvanescentExtension)
                }
            }
        }
    }
}

/// Row/column restriction of a convolution kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelBlock {
    /// rows and columns on open channels
    Open,
    /// rows and columns on closed channels
    Closed,
    /// rows open, columns closed: the coupling the approximation neglects
    OpenFromClosed,
    /// rows closed, columns open
    ClosedFromOpen,
    /// everything
    Full,
}

impl KernelBlock {
    pub fn name(self) -> &'static str {
        match self {
            KernelBlock::Open => "open",
            KernelBlock::Closed => "closed",
            KernelBlock::OpenFromClosed => "open_from_closed",
            KernelBlock::ClosedFromOpen => "closed_from_open",
            KernelBlock::Full => "full",
        }
    }

    fn ranges(self, grid: &MomentumGrid) -> Result<((usize, usize), (usize, usize))> {
        let open = (0, grid.n_prop());
        let closed = (grid.n_prop(), grid.len());
        let all = (0, grid.len());
        let needs_ev = !matches!(self, KernelBlock::Open);
        if needs_ev && !grid.has_extension() {
            return Err(Error::NoEvanescentExtension);
        }
        Ok(match self {
            KernelBlock::Open => (open, open),
            KernelBlock::Closed => (closed, closed),
            KernelBlock::OpenFromClosed => (open, closed),
            KernelBlock::ClosedFromOpen => (closed, open),
            KernelBlock::Full => (all, all),
        })
    }
}

/// A dense operator between two contiguous node ranges of one grid.
#[derive(Debug, Clone)]
pub struct ChannelOperator {
    grid: Arc<MomentumGrid>,
    rows: (usize, usize),
    cols: (usize, usize),
    mat: Array2<C64>,
}

impl ChannelOperator {
    pub fn grid(&self) -> &Arc<MomentumGrid> {
        &self.grid
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn rows(&self) -> (usize, usize) {
        self.rows
    }

    pub fn cols(&self) -> (usize, usize) {
        self.cols
    }

    /// Applies the operator to samples on its column range.
    pub fn apply(&self, phi: &Array1<C64>) -> Result<Array1<C64>> {
        if phi.len() != self.cols.1 - self.cols.0 {
            return Err(Error::InvalidParameter(format!(
                "operator expects {} samples, got {}",
                self.cols.1 - self.cols.0,
                phi.len()
            )));
        }
        Ok(self.mat.dot(phi))
    }

    /// Operator composition `self . other`; column and row ranges must chain.
    pub fn dot(&self, other: &ChannelOperator) -> Result<ChannelOperator> {
        if !Arc::ptr_eq(&self.grid, &other.grid) {
            return Err(Error::GridMismatch);
        }
        if self.cols != other.rows {
            return Err(Error::InvalidParameter(
                "operator domains do not chain".into(),
            ));
        }
        Ok(ChannelOperator {
            grid: self.grid.clone(),
            rows: self.rows,
            cols: other.cols,
            mat: self.mat.dot(&other.mat),
        })
    }

    pub fn sub(&self, other: &ChannelOperator) -> Result<ChannelOperator> {
        if !Arc::ptr_eq(&self.grid, &other.grid) {
            return Err(Error::GridMismatch);
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::InvalidParameter("operator shapes differ".into()));
        }
        Ok(ChannelOperator {
            grid: self.grid.clone(),
            rows: self.rows,
            cols: self.cols,
            mat: &self.mat - &other.mat,
        })
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.mat)
    }
}

/// Convolution kernel of the potential at longitudinal position `x`,
/// restricted to `block`. For the delta-plane family the entries are the
/// coefficient of the longitudinal delta (see
/// [`Potential::fourier_y`]), which is what the closed-form one-step
/// propagation consumes.
pub fn potential_kernel(
    v: &Potential,
    grid: &Arc<MomentumGrid>,
    x: f64,
    block: KernelBlock,
) -> Result<ChannelOperator> {
    let (rows, cols) = block.ranges(grid)?;
    let mut mat = Array2::<C64>::zeros((rows.1 - rows.0, cols.1 - cols.0));
    for (bi, i) in (rows.0..rows.1).enumerate() {
        let pi = grid.p(i);
        for (bj, j) in (cols.0..cols.1).enumerate() {
            let w = grid.p_weight(j) / TWO_PI;
            mat[[bi, bj]] = v.fourier_y(x, pi - grid.p(j)) * w;
        }
    }
    Ok(ChannelOperator { grid: grid.clone(), rows, cols, mat })
}

/// Orthogonal projector onto the open channels, as a diagonal operator on
/// the extended grid.
pub fn projector(grid: &Arc<MomentumGrid>) -> Result<ChannelOperator> {
    if !grid.has_extension() {
        return Err(Error::NoEvanescentExtension);
    }
    let n = grid.len();
    let mut mat = Array2::<C64>::zeros((n, n));
    for i in 0..grid.n_prop() {
        mat[[i, i]] = C64::new(1.0, 0.0);
    }
    Ok(ChannelOperator { grid: grid.clone(), rows: (0, n), cols: (0, n), mat })
}

/// Diagonal free-propagation kernel `sin(kx dx) / kx` over the channels of
/// `mode`; on closed channels this continues to `sinh(|kx| dx) / |kx|`.
pub fn sine_kernel(grid: &Arc<MomentumGrid>, dx: f64, mode: Mode) -> Result<ChannelOperator> {
    let n = mode.dim(grid)?;
    let mut mat = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        let kx = grid.kx(i);
        mat[[i, i]] = (kx * dx).sin() / kx;
    }
    Ok(ChannelOperator { grid: grid.clone(), rows: (0, n), cols: (0, n), mat })
}

/// The `x`-independent part of the scaled kernel `v(x) / kx` (everything
/// except the longitudinal profile `g(x)`): entry `(i, j)` is
/// `zeta ht(p_i - p_j) pw_j / (2 pi kx_j)`. The propagation hot path caches
/// this and rescales by `g(x)` per evaluation.
pub(crate) fn spectral_over_kx(
    v: &Potential,
    grid: &MomentumGrid,
    mode: Mode,
) -> Result<Array2<C64>> {
    let n = mode.dim(grid)?;
    let mut mat = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        let pi = grid.p(i);
        for j in 0..n {
            let scale = C64::new(grid.p_weight(j) / TWO_PI, 0.0) / grid.kx(j);
            mat[[i, j]] = v.fourier_profile(pi - grid.p(j)) * scale;
        }
    }
    Ok(mat)
}

/// Phase diagonal `exp(sign * i * kx_i * x)` over the first `n` channels.
pub(crate) fn phase_diag(grid: &MomentumGrid, n: usize, x: f64, sign: f64) -> Array1<C64> {
    Array1::from_iter((0..n).map(|i| (grid.kx(i) * C64::new(0.0, sign * x)).exp()))
}

/// A two-component block operator on the channels of one grid: the natural
/// container for the transfer ODE generator and for transfer matrices.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    grid: Arc<MomentumGrid>,
    mode: Mode,
    blocks: [Array2<C64>; 4],
}

impl BlockOperator {
    pub fn zeros(grid: &Arc<MomentumGrid>, mode: Mode) -> Result<Self> {
        let n = mode.dim(grid)?;
        Ok(BlockOperator {
            grid: grid.clone(),
            mode,
            blocks: std::array::from_fn(|_| Array2::zeros((n, n))),
        })
    }

    pub fn identity(grid: &Arc<MomentumGrid>, mode: Mode) -> Result<Self> {
        let mut out = Self::zeros(grid, mode)?;
        let n = out.dim();
        for b in [0, 3] {
            for i in 0..n {
                out.blocks[b][[i, i]] = C64::new(1.0, 0.0);
            }
        }
        Ok(out)
    }

    pub(crate) fn from_blocks(
        grid: &Arc<MomentumGrid>,
        mode: Mode,
        blocks: [Array2<C64>; 4],
    ) -> Self {
        BlockOperator { grid: grid.clone(), mode, blocks }
    }

    pub fn grid(&self) -> &Arc<MomentumGrid> {
        &self.grid
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Channels per component.
    pub fn dim(&self) -> usize {
        self.blocks[0].nrows()
    }

    /// Block `(r, c)` with `r, c` in `{0, 1}`: 0 indexes the right-moving
    /// component, 1 the left-moving one.
    pub fn block(&self, r: usize, c: usize) -> &Array2<C64> {
        &self.blocks[2 * r + c]
    }

    pub(crate) fn block_mut(&mut self, r: usize, c: usize) -> &mut Array2<C64> {
        &mut self.blocks[2 * r + c]
    }

    fn check_compatible(&self, other: &BlockOperator) -> Result<()> {
        if !Arc::ptr_eq(&self.grid, &other.grid) {
            return Err(Error::GridMismatch);
        }
        if self.mode != other.mode {
            return Err(Error::ModeMismatch {
                expected: self.mode.name(),
                found: other.mode.name(),
            });
        }
        Ok(())
    }

    /// Block-wise product `self . other`.
    pub fn dot(&self, other: &BlockOperator) -> Result<BlockOperator> {
        self.check_compatible(other)?;
        let a = &self.blocks;
        let b = &other.blocks;
        Ok(BlockOperator {
            grid: self.grid.clone(),
            mode: self.mode,
            blocks: [
                a[0].dot(&b[0]) + a[1].dot(&b[2]),
                a[0].dot(&b[1]) + a[1].dot(&b[3]),
                a[2].dot(&b[0]) + a[3].dot(&b[2]),
                a[2].dot(&b[1]) + a[3].dot(&b[3]),
            ],
        })
    }

    pub fn add(&self, other: &BlockOperator) -> Result<BlockOperator> {
        self.check_compatible(other)?;
        Ok(BlockOperator {
            grid: self.grid.clone(),
            mode: self.mode,
            blocks: std::array::from_fn(|i| &self.blocks[i] + &other.blocks[i]),
        })
    }

    pub fn sub(&self, other: &BlockOperator) -> Result<BlockOperator> {
        self.check_compatible(other)?;
        Ok(BlockOperator {
            grid: self.grid.clone(),
            mode: self.mode,
            blocks: std::array::from_fn(|i| &self.blocks[i] - &other.blocks[i]),
        })
    }

    pub fn scale(&self, factor: C64) -> BlockOperator {
        BlockOperator {
            grid: self.grid.clone(),
            mode: self.mode,
            blocks: std::array::from_fn(|i| self.blocks[i].mapv(|z| z * factor)),
        }
    }

    /// Largest entry magnitude across all four blocks.
    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(linalg::max_abs).fold(0.0, f64::max)
    }

    /// Restriction of a full-mode operator to the open channels.
    pub fn project(&self) -> Result<BlockOperator> {
        if self.mode != Mode::Full {
            return Err(Error::ModeMismatch { expected: "full", found: self.mode.name() });
        }
        let n = self.grid.n_prop();
        Ok(BlockOperator {
            grid: self.grid.clone(),
            mode: Mode::Propagating,
            blocks: std::array::from_fn(|i| self.blocks[i].slice(s![..n, ..n]).to_owned()),
        })
    }

    /// Packs the four blocks into one dense `2n x 2n` matrix.
    pub fn to_dense(&self) -> Array2<C64> {
        let n = self.dim();
        let mut out = Array2::zeros((2 * n, 2 * n));
        for r in 0..2 {
            for c in 0..2 {
                out.slice_mut(s![r * n..(r + 1) * n, c * n..(c + 1) * n])
                    .assign(self.block(r, c));
            }
        }
        out
    }

    pub(crate) fn from_dense(
        grid: &Arc<MomentumGrid>,
        mode: Mode,
        dense: &Array2<C64>,
    ) -> Result<Self> {
        let n = mode.dim(grid)?;
        if dense.nrows() != 2 * n || dense.ncols() != 2 * n {
            return Err(Error::InvalidParameter("dense block size mismatch".into()));
        }
        Ok(BlockOperator {
            grid: grid.clone(),
            mode,
            blocks: std::array::from_fn(|i| {
                let (r, c) = (i / 2, i % 2);
                dense.slice(s![r * n..(r + 1) * n, c * n..(c + 1) * n]).to_owned()
            }),
        })
    }
}

/// Generator of the transfer ODE at position `x` (see the module docs for
/// the block pattern). Rejects the delta-plane family, whose longitudinal
/// dependence is distributional; use the closed-form one-step propagation
/// instead.
pub fn hamiltonian(
    v: &Potential,
    grid: &Arc<MomentumGrid>,
    x: f64,
    mode: Mode,
) -> Result<BlockOperator> {
    if v.is_delta_x() {
        return Err(Error::WrongFamily {
            expected: "a family with pointwise longitudinal dependence",
            found: "delta_x_slab",
        });
    }
    let n = mode.dim(grid)?;
    let g = v.x_profile(x);
    let mut out = BlockOperator::zeros(grid, mode)?;
    if g == 0.0 {
        return Ok(out);
    }
    let mut c = spectral_over_kx(v, grid, mode)?;
    c.mapv_inplace(|z| z * 0.5 * g);
    let e_plus = phase_diag(grid, n, x, 1.0);
    let e_minus = phase_diag(grid, n, x, -1.0);
    for (r, row_phase, row_sign) in [(0, &e_minus, 1.0), (1, &e_plus, -1.0)] {
        for (col, col_phase) in [(0, &e_plus), (1, &e_minus)] {
            let block = out.block_mut(r, col);
            for i in 0..n {
                let rp = row_phase[i] * row_sign;
                for j in 0..n {
                    block[[i, j]] = rp * c[[i, j]] * col_phase[j];
                }
            }
        }
    }
    Ok(out)
}

/// Operator norm (largest singular value) of the open-from-closed coupling
/// block at position `x`, in the symmetrized `L^2(dp)` weighting. This is
/// the quantity whose smallness justifies dropping the closed channels; it
/// scales exactly linearly in the coupling strength.
pub fn coupling_norm(v: &Potential, grid: &Arc<MomentumGrid>, x: f64) -> Result<f64> {
    if !grid.has_extension() {
        return Err(Error::NoEvanescentExtension);
    }
    let n_open = grid.n_prop();
    let n_closed = grid.len() - n_open;
    let mut mat = Array2::<C64>::zeros((n_open, n_closed));
    for i in 0..n_open {
        let pi = grid.p(i);
        let ri = grid.p_weight(i).sqrt();
        for (bj, j) in (n_open..grid.len()).enumerate() {
            let cj = grid.p_weight(j).sqrt();
            mat[[i, bj]] = v.fourier_y(x, pi - grid.p(j)) * (ri * cj / TWO_PI);
        }
    }
    Ok(linalg::sigma_max(&mat))
}
