//! Interaction families and their transverse spectra.
//!
//! Every supported potential factorizes as `v(x, y) = zeta * g(x) * h(y)`
//! with a longitudinal profile `g` supported on `a_minus <= x <= a_plus` and
//! a transverse factor `h` whose Fourier transform
//! `ht(p) = integral dy exp(-i p y) h(y)` is known in closed form (or
//! precomputed once for sampled data). Operators only ever consume the
//! spectral side, `vt(x, p) = zeta * g(x) * ht(p)`, so families are defined
//! primarily by `ht`:
//!
//! | family               | `h(y)`                        | `ht(p)`                                  |
//! |----------------------|-------------------------------|------------------------------------------|
//! | `delta_line`         | `delta(y)`                    | `1`                                      |
//! | `sinc_line`          | `sin(kappa y) / (pi y)`       | indicator of `|p| < kappa`               |
//! | `inverse_pole`       | `1 / (beta - i y)^(l+1)`      | `2 pi p^l exp(-beta p) / l!` for `p > 0` |
//! | `separable_spectrum` | same potential, spectral form | same as `inverse_pole`                   |
//! | `gaussian_modulated` | `exp(i alpha y - b^2 y^2 / 2)`| `sqrt(2 pi)/b exp(-(p-alpha)^2/(2 b^2))` |
//! | `product_separable`  | sampled, linear interpolation | tabulated transform, windowed            |
//! | `delta_x_slab`       | one of the kernels below      | kernel transform, times `delta(x - a)`   |
//!
//! `inverse_pole` (and `separable_spectrum`, which is the same interaction
//! entered through its spectral representation) vanishes identically for
//! `p <= 0`; this one-sided support is what several structural checks in
//! [`crate::verify`] exercise.


use crate::error::Error;
use crate::{Result, C64};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Longitudinal profile `g(x)`, real-valued, supported on the open interval
/// between the slab faces (complex strength lives in the coupling).
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `g = 1` strictly inside the slab, `0` outside.
    Uniform,
    /// Hann bump `g = (1 - cos(2 pi (x - a) / L)) / 2`: vanishes at both
    /// faces, peaks at 1 in the middle.
    RaisedCosine,
    /// Piecewise-linear interpolation of `(xs, values)`; zero outside the
    /// sampled range.
    Tabulated { xs: Vec<f64>, values: Vec<f64> },
}

impl Profile {
    fn validate(&self) -> Result<()> {
        if let Profile::Tabulated { xs, values } = self {
            if xs.len() < 2 || xs.len() != values.len() {
                return Err(Error::InvalidParameter(
                    "tabulated profile needs matching xs/values with at least 2 samples".into(),
                ));
            }
            if !xs.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidParameter(
                    "tabulated profile abscissae must be strictly increasing".into(),
                ));
            }
            if xs.iter().chain(values).any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(
                    "tabulated profile contains non-finite samples".into(),
                ));
            }
        }
        Ok(())
    }

    fn value(&self, x: f64, support: (f64, f64)) -> f64 {
        let (a, b) = support;
        if x <= a || x >= b {
            return 0.0;
        }
        self.interior(x, support)
    }

    /// Like [`Profile::value`], but on a support face it returns the limit
    /// from inside instead of the outside value `0`.  The two differ only on
    /// a set of measure zero, so integrals of `g` are indifferent; pointwise
    /// samplers that land on a face bitwise (ODE stages, in particular) need
    /// the interior representative to see a smooth integrand.
    fn interior(&self, x: f64, support: (f64, f64)) -> f64 {
        let (a, b) = support;
        if x < a || x > b {
            return 0.0;
        }
        match self {
            Profile::Uniform => 1.0,
            Profile::RaisedCosine => 0.5 * (1.0 - (TWO_PI * (x - a) / (b - a)).cos()),
            Profile::Tabulated { xs, values } => interp_linear(xs, values, x),
        }
    }

    /// Abscissae where `g` is not smooth; quadratures split panels here.
    /// Always includes the support faces, so the spans between consecutive
    /// knots never straddle the boundary of the region where `g` lives.
    fn knots(&self, support: (f64, f64)) -> Vec<f64> {
        let mut k = vec![support.0, support.1];
        if let Profile::Tabulated { xs, .. } = self {
            k.extend(xs.iter().copied().filter(|&x| x > support.0 && x < support.1));
            k.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        k
    }
}

fn interp_linear(xs: &[f64], values: &[f64], x: f64) -> f64 {
    if x < xs[0] || x > *xs.last().unwrap() {
        return 0.0;
    }
    let idx = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => return values[i],
        Err(i) => i - 1,
    };
    let t = (x - xs[idx]) / (xs[idx + 1] - xs[idx]);
    values[idx] * (1.0 - t) + values[idx + 1] * t
}

/// Transverse kernel of a `delta_x_slab`: the `y`-dependence multiplying the
/// longitudinal delta.
#[derive(Debug, Clone, PartialEq)]
pub enum YKernel {
    /// `delta(y)`; transform 1.
    Delta,
    /// Modulated Gaussian, as in [`Family::GaussianModulated`].
    GaussianModulated { alpha: f64, beta: f64 },
    /// Inverse pole, as in [`Family::InversePole`].
    InversePole { beta: f64, ell: u32 },
}

impl YKernel {
    fn fourier(&self, p: f64) -> C64 {
        match *self {
            YKernel::Delta => C64::new(1.0, 0.0),
            YKernel::GaussianModulated { alpha, beta } => gaussian_spectrum(alpha, beta, p),
            YKernel::InversePole { beta, ell } => pole_spectrum(beta, ell, p),
        }
    }

    fn half_axis(&self) -> HalfAxis {
        match self {
            YKernel::InversePole { .. } => HalfAxis::VanishesNonpositive,
            _ => HalfAxis::Neither,
        }
    }
}

/// Interaction family; see the module table for formulas.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    DeltaLine,
    SincLine { kappa: f64 },
    DeltaXSlab { kernel: YKernel },
    SeparableSpectrum { beta: f64, ell: u32 },
    InversePole { beta: f64, ell: u32 },
    GaussianModulated { alpha: f64, beta: f64 },
    ProductSeparable { kernel: SampledKernel },
}

impl Family {
    /// Stable name used in error messages and reports.
    pub fn name(&self) -> &'static str {
        match self {
            Family::DeltaLine => "delta_line",
            Family::SincLine { .. } => "sinc_line",
            Family::DeltaXSlab { .. } => "delta_x_slab",
            Family::SeparableSpectrum { .. } => "separable_spectrum",
            Family::InversePole { .. } => "inverse_pole",
            Family::GaussianModulated { .. } => "gaussian_modulated",
            Family::ProductSeparable { .. } => "product_separable",
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        match self {
            Family::SincLine { kappa } if !(*kappa > 0.0) => bad("sinc_line requires kappa > 0"),
            Family::SeparableSpectrum { beta, ell } | Family::InversePole { beta, ell } => {
                if !(*beta > 0.0) {
                    bad("pole families require beta > 0")
                } else if *ell > 30 {
                    bad("pole order ell must be at most 30")
                } else {
                    Ok(())
                }
            }
            Family::GaussianModulated { beta, .. } if !(*beta > 0.0) => {
                bad("gaussian_modulated requires beta > 0")
            }
            Family::DeltaXSlab { kernel } => match kernel {
                YKernel::GaussianModulated { beta, .. } if !(*beta > 0.0) => {
                    bad("gaussian kernel requires beta > 0")
                }
                YKernel::InversePole { beta, ell } => {
                    if !(*beta > 0.0) {
                        bad("pole kernel requires beta > 0")
                    } else if *ell > 30 {
                        bad("pole order ell must be at most 30")
                    } else {
                        Ok(())
                    }
                }
                _ => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

fn factorial(ell: u32) -> f64 {
    (1..=ell).map(|j| j as f64).product()
}

/// `2 pi p^l exp(-beta p) / l!` for `p > 0`, identically zero otherwise.
fn pole_spectrum(beta: f64, ell: u32, p: f64) -> C64 {
    if p <= 0.0 {
        return C64::new(0.0, 0.0);
    }
    C64::new(TWO_PI * p.powi(ell as i32) * (-beta * p).exp() / factorial(ell), 0.0)
}

fn gaussian_spectrum(alpha: f64, beta: f64, p: f64) -> C64 {
    let t = (p - alpha) / beta;
    C64::new(TWO_PI.sqrt() / beta * (-0.5 * t * t).exp(), 0.0)
}

/// Tabulated transverse factor: raw samples of `h(y)` plus its transform,
/// computed once per construction on a uniform `p` window and interpolated
/// afterwards so spectral lookups stay cheap inside assembly loops.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledKernel {
    ys: Vec<f64>,
    hs: Vec<f64>,
    p_max: f64,
    table: Vec<C64>,
}

impl SampledKernel {
    /// Builds the transform table on `[-p_max, p_max]` with `n_table`
    /// samples. `h` is treated as piecewise linear between `(ys, hs)` and
    /// zero outside, so each segment's transform has a closed form; the
    /// table is exact to rounding, the only approximation afterwards is the
    /// linear interpolation in `p` and the hard window (`ht` is reported as
    /// zero beyond `p_max`).
    pub fn new(ys: Vec<f64>, hs: Vec<f64>, p_max: f64, n_table: usize) -> Result<Self> {
        if ys.len() < 2 || ys.len() != hs.len() {
            return Err(Error::InvalidParameter(
                "sampled kernel needs matching ys/hs with at least 2 samples".into(),
            ));
        }
        if !ys.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "sampled kernel abscissae must be strictly increasing".into(),
            ));
        }
        if ys.iter().chain(hs.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "sampled kernel contains non-finite samples".into(),
            ));
        }
        if !(p_max > 0.0) || n_table < 16 {
            return Err(Error::InvalidParameter(
                "sampled kernel needs p_max > 0 and at least 16 table points".into(),
            ));
        }
        let mut table = Vec::with_capacity(n_table);
        for i in 0..n_table {
            let p = -p_max + 2.0 * p_max * i as f64 / (n_table - 1) as f64;
            table.push(fourier_of_polyline(&ys, &hs, p));
        }
        Ok(SampledKernel { ys, hs, p_max, table })
    }

    fn interp(&self, p: f64) -> C64 {
        if p < -self.p_max || p > self.p_max {
            return C64::new(0.0, 0.0);
        }
        let n = self.table.len();
        let t = (p + self.p_max) / (2.0 * self.p_max) * (n - 1) as f64;
        let idx = (t.floor() as usize).min(n - 2);
        let frac = t - idx as f64;
        self.table[idx] * (1.0 - frac) + self.table[idx + 1] * frac
    }

    fn value(&self, y: f64) -> f64 {
        interp_linear(&self.ys, &self.hs, y)
    }
}

/// Exact transform of a piecewise-linear function: per segment,
/// `integral exp(-i p y) (c0 + c1 y) dy` in closed form.
fn fourier_of_polyline(ys: &[f64], hs: &[f64], p: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..ys.len() - 1 {
        let (y0, y1) = (ys[j], ys[j + 1]);
        let (h0, h1) = (hs[j], hs[j + 1]);
        let slope = (h1 - h0) / (y1 - y0);
        // antiderivative of exp(-i p y) (h0 + slope (y - y0))
        if p.abs() * (y1 - y0) < 1e-8 {
            // phase barely turns across the segment: trapezoid is exact
            // enough, and avoids the 1/p cancellation
            let mid = 0.5 * (y0 + y1);
            acc += C64::new(0.0, -p * mid).exp() * (0.5 * (h0 + h1) * (y1 - y0));
        } else {
            let anti = |y: f64, c: f64| -> C64 {
                let e = C64::new(0.0, -p * y).exp();
                e * (C64::new(0.0, (c + slope * (y - y0)) / p) + C64::new(slope / (p * p), 0.0))
            };
            acc += anti(y1, h0) - anti(y0, h0);
        }
    }
    acc
}

/// Which half of the momentum axis the transverse spectrum vanishes on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfAxis {
    /// `ht(p) = 0` for every `p <= 0`.
    VanishesNonpositive,
    /// `ht(p) = 0` for every `p >= 0`.
    VanishesNonnegative,
    /// No one-sided support.
    Neither,
}

impl HalfAxis {
    fn flipped(self) -> Self {
        match self {
            HalfAxis::VanishesNonpositive => HalfAxis::VanishesNonnegative,
            HalfAxis::VanishesNonnegative => HalfAxis::VanishesNonpositive,
            HalfAxis::Neither => HalfAxis::Neither,
        }
    }
}

/// A concrete interaction: family, complex coupling, slab faces, and
/// longitudinal profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    family: Family,
    coupling: C64,
    support: (f64, f64),
    profile: Profile,
    /// When set, this potential is the `y`-mirror of its family formulas:
    /// `v(x, y) -> v(x, -y)`, i.e. `ht(p) -> ht(-p)`.
    mirrored: bool,
}

impl Potential {
    pub fn new(family: Family, coupling: C64, support: (f64, f64), profile: Profile) -> Result<Self> {
        family.validate()?;
        profile.validate()?;
        if !support.0.is_finite() || !support.1.is_finite() {
            return Err(Error::InvalidParameter("support must be finite".into()));
        }
        if matches!(family, Family::DeltaXSlab { .. }) {
            if support.0 != support.1 {
                return Err(Error::InvalidParameter(
                    "delta_x_slab is supported on a single plane: set a_minus = a_plus".into(),
                ));
            }
            if profile != Profile::Uniform {
                return Err(Error::InvalidParameter(
                    "delta_x_slab carries no longitudinal profile; use the uniform one".into(),
                ));
            }
        } else if !(support.0 < support.1) {
            return Err(Error::InvalidParameter(
                "support requires a_minus < a_plus".into(),
            ));
        }
        if !coupling.re.is_finite() || !coupling.im.is_finite() {
            return Err(Error::InvalidParameter("coupling must be finite".into()));
        }
        Ok(Potential { family, coupling, support, profile, mirrored: false })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn coupling(&self) -> C64 {
        self.coupling
    }

    /// Slab faces `(a_minus, a_plus)`.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// True for the family supported on a single `x` plane.
    pub fn is_delta_x(&self) -> bool {
        matches!(self.family, Family::DeltaXSlab { .. })
    }

    /// Same interaction with the coupling multiplied by `factor`.
    pub fn scaled(&self, factor: C64) -> Potential {
        let mut out = self.clone();
        out.coupling *= factor;
        out
    }

    /// The `y`-reflected interaction `w(x, y) = v(x, -y)`.
    pub fn reflected_y(&self) -> Potential {
        let mut out = self.clone();
        out.mirrored = !out.mirrored;
        out
    }

    /// Longitudinal factor `g(x)` (zero outside the slab). For the
    /// delta-plane family the longitudinal dependence is distributional and
    /// this is not meaningful; callers dispatch on [`Self::is_delta_x`]
    /// first.
    pub fn x_profile(&self, x: f64) -> f64 {
        self.profile.value(x, self.support)
    }

    /// `x`-profile with faces resolved to their interior limit.
    ///
    /// The transfer ODE places stages exactly on panel edges, which coincide
    /// bitwise with the support faces; sampling the outside value `0` there
    /// would put a spurious jump inside the first step.  The integral only
    /// depends on `g` almost everywhere, so the stepper reads this variant.
    pub(crate) fn x_profile_interior(&self, x: f64) -> f64 {
        self.profile.interior(x, self.support)
    }

    /// The `x`-independent spectral factor `zeta * ht(p)`.
    pub fn fourier_profile(&self, p: f64) -> C64 {
        let p = if self.mirrored { -p } else { p };
        let ht = match &self.family {
            Family::DeltaLine => C64::new(1.0, 0.0),
            Family::SincLine { kappa } => {
                if p.abs() < *kappa {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            Family::DeltaXSlab { kernel } => kernel.fourier(p),
            Family::SeparableSpectrum { beta, ell } | Family::InversePole { beta, ell } => {
                pole_spectrum(*beta, *ell, p)
            }
            Family::GaussianModulated { alpha, beta } => gaussian_spectrum(*alpha, *beta, p),
            Family::ProductSeparable { kernel } => kernel.interp(p),
        };
        self.coupling * ht
    }

    /// Partial Fourier transform `vt(x, p) = integral dy exp(-i p y) v(x, y)`.
    ///
    /// For `delta_x_slab` the longitudinal delta cannot be evaluated
    /// pointwise; the returned value is the coefficient of `delta(x - a)`,
    /// i.e. the spectral factor alone, independent of `x`.
    pub fn fourier_y(&self, x: f64, p: f64) -> C64 {
        if self.is_delta_x() {
            return self.fourier_profile(p);
        }
        self.fourier_profile(p) * self.x_profile(x)
    }

    /// Pointwise value `v(x, y)`. Distributional families refuse evaluation
    /// exactly at their singular coordinate and are zero elsewhere.
    pub fn value(&self, x: f64, y: f64) -> Result<C64> {
        let y = if self.mirrored { -y } else { y };
        let g = match &self.family {
            Family::DeltaXSlab { .. } => {
                if x == self.support.0 {
                    return Err(Error::DistributionalEvaluation {
                        family: "delta_x_slab",
                        coordinate: "x",
                        value: x,
                    });
                }
                return Ok(C64::new(0.0, 0.0));
            }
            _ => self.x_profile(x),
        };
        let h = match &self.family {
            Family::DeltaLine => {
                if y == 0.0 {
                    return Err(Error::DistributionalEvaluation {
                        family: "delta_line",
                        coordinate: "y",
                        value: y,
                    });
                }
                C64::new(0.0, 0.0)
            }
            Family::SincLine { kappa } => {
                if y == 0.0 {
                    C64::new(kappa / std::f64::consts::PI, 0.0)
                } else {
                    C64::new((kappa * y).sin() / (std::f64::consts::PI * y), 0.0)
                }
            }
            Family::SeparableSpectrum { beta, ell } | Family::InversePole { beta, ell } => {
                C64::new(1.0, 0.0) / C64::new(*beta, -y).powu(ell + 1)
            }
            Family::GaussianModulated { alpha, beta } => {
                C64::new(0.0, alpha * y).exp() * (-0.5 * beta * beta * y * y).exp()
            }
            Family::ProductSeparable { kernel } => C64::new(kernel.value(y), 0.0),
            Family::DeltaXSlab { .. } => unreachable!(),
        };
        Ok(self.coupling * h * g)
    }

    /// One-sided momentum support of the transverse spectrum, classified
    /// analytically from the family (mirroring flips the side). The sampled
    /// family is always [`HalfAxis::Neither`]: its windowed numerical
    /// transform carries no exact support statement.
    pub fn half_axis(&self) -> HalfAxis {
        let base = match &self.family {
            Family::SeparableSpectrum { .. } | Family::InversePole { .. } => {
                HalfAxis::VanishesNonpositive
            }
            Family::DeltaXSlab { kernel } => kernel.half_axis(),
            _ => HalfAxis::Neither,
        };
        if self.mirrored { base.flipped() } else { base }
    }

    /// Longitudinal abscissae where the integrand is not smooth (slab faces
    /// and profile knots); `x` quadratures split panels here.
    pub fn x_breakpoints(&self) -> Vec<f64> {
        self.profile.knots(self.support)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{gauss_legendre, map_to};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn gauss(coupling: C64) -> Potential {
        Potential::new(
            Family::GaussianModulated { alpha: 2.0, beta: 1.0 },
            coupling,
            (0.0, 1.0),
            Profile::Uniform,
        )
        .unwrap()
    }

    #[test]
    fn gaussian_closed_forms() {
        let v = gauss(C64::new(1.0, 0.0));
        let val = v.value(0.5, 0.0).unwrap();
        assert_relative_eq!(val.re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(val.im, 0.0, epsilon = 1e-15);
        // spectrum peaks at p = alpha with height sqrt(2 pi) / beta
        let ft = v.fourier_y(0.5, 2.0);
        assert_relative_eq!(ft.re, TWO_PI.sqrt(), epsilon = 1e-14);
        assert_eq!(v.fourier_y(1.5, 2.0), C64::new(0.0, 0.0));
    }

    #[test]
    fn pole_spectrum_is_one_sided() {
        let v = Potential::new(
            Family::SeparableSpectrum { beta: 1.0, ell: 0 },
            C64::new(1.0, 0.0),
            (0.0, 1.0),
            Profile::Uniform,
        )
        .unwrap();
        assert_eq!(v.fourier_y(0.5, -0.3), C64::new(0.0, 0.0));
        assert_eq!(v.fourier_y(0.5, 0.0), C64::new(0.0, 0.0));
        let ft = v.fourier_y(0.5, 1.2);
        assert_relative_eq!(ft.re, TWO_PI * (-1.2_f64).exp(), max_relative = 1e-14);
        assert_eq!(v.half_axis(), HalfAxis::VanishesNonpositive);
        assert_eq!(v.reflected_y().half_axis(), HalfAxis::VanishesNonnegative);
        assert_eq!(v.reflected_y().fourier_y(0.5, 1.2), C64::new(0.0, 0.0));
    }

    #[test]
    fn delta_line_rejects_pointwise_evaluation_on_the_line() {
        let v = Potential::new(
            Family::DeltaLine,
            C64::new(2.0, 0.0),
            (-1.0, 1.0),
            Profile::Uniform,
        )
        .unwrap();
        assert!(matches!(
            v.value(0.2, 0.0),
            Err(Error::DistributionalEvaluation { family: "delta_line", .. })
        ));
        assert_eq!(v.value(0.2, 0.5).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(v.fourier_y(0.2, 123.0), C64::new(2.0, 0.0));
    }

    #[test]
    fn sinc_band_limits_the_spectrum() {
        let v = Potential::new(
            Family::SincLine { kappa: 2.0 },
            C64::new(1.0, 0.0),
            (0.0, 1.0),
            Profile::Uniform,
        )
        .unwrap();
        assert_eq!(v.fourier_y(0.5, 1.9), C64::new(1.0, 0.0));
        assert_eq!(v.fourier_y(0.5, 2.1), C64::new(0.0, 0.0));
        // pointwise value at y = 0 is the kappa/pi limit
        assert_relative_eq!(
            v.value(0.5, 0.0).unwrap().re,
            2.0 / std::f64::consts::PI,
            epsilon = 1e-15
        );
    }

    #[test]
    fn delta_slab_exposes_its_kernel_transform() {
        let v = Potential::new(
            Family::DeltaXSlab { kernel: YKernel::InversePole { beta: 1.0, ell: 1 } },
            C64::new(1.0, 0.0),
            (0.0, 0.0),
            Profile::Uniform,
        )
        .unwrap();
        assert!(v.is_delta_x());
        assert!(matches!(
            v.value(0.0, 0.3),
            Err(Error::DistributionalEvaluation { family: "delta_x_slab", .. })
        ));
        assert_eq!(v.value(0.5, 0.3).unwrap(), C64::new(0.0, 0.0));
        let ft = v.fourier_y(0.0, 2.0);
        assert_relative_eq!(ft.re, TWO_PI * 2.0 * (-2.0_f64).exp(), max_relative = 1e-14);
        assert_eq!(v.half_axis(), HalfAxis::VanishesNonpositive);
    }

    #[test]
    fn delta_slab_requires_coincident_faces() {
        let r = Potential::new(
            Family::DeltaXSlab { kernel: YKernel::Delta },
            C64::new(1.0, 0.0),
            (0.0, 1.0),
            Profile::Uniform,
        );
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn profiles_vanish_outside_and_interpolate_inside() {
        let p = Profile::Tabulated { xs: vec![0.0, 1.0, 3.0], values: vec![0.0, 2.0, 1.0] };
        assert_eq!(p.value(-0.5, (0.0, 3.0)), 0.0);
        assert_relative_eq!(p.value(0.5, (0.0, 3.0)), 1.0);
        assert_relative_eq!(p.value(2.0, (0.0, 3.0)), 1.5);
        let rc = Profile::RaisedCosine;
        assert_relative_eq!(rc.value(0.5, (0.0, 1.0)), 1.0, epsilon = 1e-15);
        assert_relative_eq!(rc.value(0.25, (0.0, 1.0)), 0.5, epsilon = 1e-15);
    }

    /// Windowed oscillatory quadrature of `exp(-i p y) v(x, y)`, resolving
    /// the phase with panels of bounded turn.
    fn fourier_by_quadrature(v: &Potential, x: f64, p: f64, window: f64) -> C64 {
        let (t, w) = gauss_legendre(8);
        let panels = ((window * (p.abs() + 1.0)) as usize).max(64);
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..panels {
            let a = -window + 2.0 * window * j as f64 / panels as f64;
            let b = -window + 2.0 * window * (j + 1) as f64 / panels as f64;
            let (xs, ws) = map_to(&t, &w, a, b);
            for (&y, &wi) in xs.iter().zip(&ws) {
                acc += v.value(x, y).unwrap() * C64::new(0.0, -p * y).exp() * wi;
            }
        }
        acc
    }

    #[test]
    fn closed_form_transforms_match_direct_quadrature() {
        // fixed probe set; |p| >= 0.3 keeps the window tail negligible for
        // the algebraically decaying pole family
        let probes = [
            (0.31, 0.45), (0.80, -1.30), (0.12, 2.20), (0.55, 0.90), (0.95, -0.60),
            (0.21, 1.70), (0.66, -2.50), (0.42, 3.10), (0.07, -0.35), (0.88, 1.05),
        ];
        let gaussian = gauss(C64::new(0.7, -0.2));
        let pole = Potential::new(
            Family::InversePole { beta: 1.0, ell: 2 },
            C64::new(1.0, 0.5),
            (0.0, 1.0),
            Profile::RaisedCosine,
        )
        .unwrap();
        for &(x, p) in &probes {
            let got = fourier_by_quadrature(&gaussian, x, p, 14.0);
            let want = gaussian.fourier_y(x, p);
            assert!((got - want).norm() <= 1e-6 * want.norm().max(1e-3), "gaussian at ({x},{p})");
            let got = fourier_by_quadrature(&pole, x, p, 4000.0);
            let want = pole.fourier_y(x, p);
            let scale = pole.fourier_y(x, 2.0 / 1.0).norm().max(want.norm());
            assert!((got - want).norm() <= 3e-6 * scale, "pole at ({x},{p}): {got} vs {want}");
        }
    }

    #[test]
    fn sampled_kernel_transform_matches_closed_form_on_a_triangle() {
        // triangle h(y) = max(0, 1 - |y|) has transform (2/p^2)(1 - cos p)
        let ys: Vec<f64> = (0..=200).map(|i| -1.0 + i as f64 / 100.0).collect();
        let hs: Vec<f64> = ys.iter().map(|&y| 1.0 - y.abs()).collect();
        let v = Potential::new(
            Family::ProductSeparable { kernel: SampledKernel::new(ys, hs, 40.0, 4001).unwrap() },
            C64::new(1.0, 0.0),
            (0.0, 1.0),
            Profile::Uniform,
        )
        .unwrap();
        for p in [0.4_f64, 1.3, 2.9, 7.0] {
            let want = 2.0 / (p * p) * (1.0 - p.cos());
            let got = v.fourier_y(0.5, p);
            assert_relative_eq!(got.re, want, max_relative = 1e-4, epsilon = 1e-6);
            assert!(got.im.abs() < 1e-9);
        }
        assert_eq!(v.fourier_y(0.5, 41.0), C64::new(0.0, 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// Doubling the coupling doubles values and spectra exactly, and the
        /// spectrum vanishes identically outside the slab.
        #[test]
        fn coupling_scaling_is_exact(x in -2.0_f64..3.0, p in -5.0_f64..5.0) {
            let v = gauss(C64::new(0.3, 0.8));
            let v2 = v.scaled(C64::new(2.0, 0.0));
            prop_assert_eq!(v2.fourier_y(x, p), v.fourier_y(x, p) * 2.0);
            let (a, b) = v.support();
            if x <= a || x >= b {
                prop_assert_eq!(v.fourier_y(x, p), C64::new(0.0, 0.0));
                prop_assert_eq!(v.value(x, p).unwrap(), C64::new(0.0, 0.0));
            }
        }

        /// The mirrored interaction evaluates to the original at -y and its
        /// spectrum at -p.
        #[test]
        fn mirror_flips_arguments(x in 0.01_f64..0.99, y in -3.0_f64..3.0, p in -4.0_f64..4.0) {
            let v = gauss(C64::new(1.0, -0.4));
            let w = v.reflected_y();
            prop_assert_eq!(w.value(x, y).unwrap(), v.value(x, -y).unwrap());
            prop_assert_eq!(w.fourier_y(x, p), v.fourier_y(x, -p));
        }
    }
}
