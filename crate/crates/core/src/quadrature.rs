//! Globally adaptive Gauss-Kronrod (7/15) quadrature for integrands that
//! decay at least like `exp(-y / scale)`.

use crate::error::{Error, Result};

/// Exponents at or below this are treated as `exp -> 0`.
pub const EXP_FLOOR: f64 = -700.0;

/// `exp(x)`, flushed to zero for `x <= EXP_FLOOR` and for `x = NaN` coming
/// from `-inf` arithmetic.
pub fn guarded_exp(x: f64) -> f64 {
    if x <= EXP_FLOOR || x.is_nan() {
        0.0
    } else {
        x.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
    /// Infinite ranges are cut at this many decay scales past the lower limit.
    pub tail_cutoff_mean_multiples: f64,
    /// Node budget, counted in subintervals.
    pub max_subintervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-8,
            absolute_tolerance: 1e-12,
            tail_cutoff_mean_multiples: 30.0,
            max_subintervals: 4000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_relative_tolerance(self, relative_tolerance: f64) -> Self {
        Self { relative_tolerance, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.relative_tolerance > 0.0 && self.absolute_tolerance > 0.0) {
            return Err(Error::invalid("quadrature tolerances must be positive"));
        }
        if !(self.tail_cutoff_mean_multiples >= 10.0) {
            return Err(Error::invalid("tail cutoff must be at least 10 mean multiples"));
        }
        if self.max_subintervals == 0 {
            return Err(Error::invalid("quadrature needs at least one subinterval"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperLimit {
    Finite(f64),
    /// `[lower, inf)` for an integrand dominated by `exp(-y / decay_scale)`.
    Infinite { decay_scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_bound: f64,
    pub subintervals: usize,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut finite = fc.is_finite();
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        finite &= pair.is_finite();
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    if !finite {
        return Err(Error::domain(format!("integrand is not finite on [{a}, {b}]")));
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs().max(50.0 * f64::EPSILON * value.abs());
    Ok(Panel { a, b, value, error })
}

/// Integrates `f` over `[lower, upper]`.
///
/// Infinite upper limits are truncated at
/// `lower + tail_cutoff_mean_multiples * decay_scale`. The worst panel is
/// bisected until the summed error estimate meets
/// `max(absolute_tolerance, relative_tolerance * |value|)`.
pub fn integrate_decaying<F>(f: F, lower: f64, upper: UpperLimit, cfg: &QuadratureConfig) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    integrate_decaying_split(f, lower, upper, &[], cfg)
}

/// As [`integrate_decaying`], with the initial partition split at every
/// breakpoint strictly inside the range. Breakpoints at the integrand's
/// length scales keep narrow features from slipping between the nodes of a
/// coarse first panel.
pub fn integrate_decaying_split<F>(
    f: F,
    lower: f64,
    upper: UpperLimit,
    breakpoints: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    let upper = match upper {
        UpperLimit::Finite(b) => b,
        UpperLimit::Infinite { decay_scale } => {
            if !(decay_scale > 0.0 && decay_scale.is_finite()) {
                return Err(Error::domain(format!("decay scale must be positive, got {decay_scale}")));
            }
            lower + cfg.tail_cutoff_mean_multiples * decay_scale
        }
    };
    if !(lower.is_finite() && upper.is_finite()) {
        return Err(Error::domain("integration limits must be finite after truncation"));
    }
    if upper <= lower {
        return Ok(Integral {
            value: 0.0,
            error_bound: 0.0,
            subintervals: 0,
        });
    }

    let mut edges: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|b| b.is_finite() && *b > lower && *b < upper)
        .collect();
    edges.push(lower);
    edges.push(upper);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut panels = edges
        .windows(2)
        .map(|w| kronrod15(&f, w[0], w[1]))
        .collect::<Result<Vec<_>>>()?;
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = cfg.absolute_tolerance.max(cfg.relative_tolerance * value.abs());
        if error <= target {
            return Ok(Integral {
                value,
                error_bound: error,
                subintervals: panels.len(),
            });
        }
        let (worst, panel) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, p)| (i, *p))
            .expect("at least one panel");
        let mid = 0.5 * (panel.a + panel.b);
        if panels.len() >= cfg.max_subintervals || !(mid > panel.a && mid < panel.b) {
            return Err(Error::Convergence {
                estimate: value,
                error_bound: error,
            });
        }
        panels[worst] = kronrod15(&f, panel.a, mid)?;
        panels.push(kronrod15(&f, mid, panel.b)?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_exponential_over_half_line() {
        let cfg = QuadratureConfig::default();
        let r = integrate_decaying(|y| (-y).exp(), 0.0, UpperLimit::Infinite { decay_scale: 1.0 }, &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn exponential_on_finite_range() {
        let cfg = QuadratureConfig::default();
        for t in [0.1, 1.0, 3.7, 12.0] {
            let r = integrate_decaying(|y| (-y).exp(), 0.0, UpperLimit::Finite(t), &cfg).unwrap();
            assert!((r.value - (1.0 - (-t).exp())).abs() < 1e-10);
        }
    }

    #[test]
    fn scaled_decay() {
        let cfg = QuadratureConfig::default();
        let lambda = 1e-6;
        let r = integrate_decaying(
            |y| (-y / lambda).exp() / lambda,
            0.0,
            UpperLimit::Infinite { decay_scale: lambda },
            &cfg,
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn sharp_feature_near_origin() {
        // knee of width 1e-5 at the origin
        let k = 1e5;
        let cfg = QuadratureConfig::default();
        let r = integrate_decaying(|y| 1.0 / (1.0 + k * y).powi(2), 0.0, UpperLimit::Finite(1.0), &cfg).unwrap();
        let exact = 1.0 / k * (1.0 - 1.0 / (1.0 + k));
        assert!((r.value - exact).abs() < 1e-8 * exact, "{} vs {exact}", r.value);
    }

    #[test]
    fn empty_range_is_zero() {
        let cfg = QuadratureConfig::default();
        let r = integrate_decaying(|_| 1.0, 2.0, UpperLimit::Finite(2.0), &cfg).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let cfg = QuadratureConfig {
            max_subintervals: 2,
            relative_tolerance: 1e-15,
            absolute_tolerance: 1e-300,
            ..QuadratureConfig::default()
        };
        let err = integrate_decaying(|y: f64| y.sqrt(), 0.0, UpperLimit::Finite(1.0), &cfg).unwrap_err();
        match err {
            Error::Convergence { estimate, error_bound } => {
                assert!((estimate - 2.0 / 3.0).abs() < 1e-2);
                assert!(error_bound > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_rejected() {
        let cfg = QuadratureConfig::default();
        assert!(integrate_decaying(|_| f64::NAN, 0.0, UpperLimit::Finite(1.0), &cfg).is_err());
    }

    #[test]
    fn guarded_exp_flushes() {
        assert_eq!(guarded_exp(-701.0), 0.0);
        assert_eq!(guarded_exp(f64::NEG_INFINITY), 0.0);
        assert_eq!(guarded_exp(0.0), 1.0);
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::default().validate().is_ok());
        let bad = QuadratureConfig {
            tail_cutoff_mean_multiples: 5.0,
            ..QuadratureConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
