//! Standard normal distribution helpers and the bivariate normal CDF.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::quadrature::adaptive_gk15;

const LOWER_CUTOFF: f64 = -10.0;

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(x)` without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Inverse of the standard normal CDF.
///
/// Wichura's AS 241 rational approximation followed by one Newton step against
/// `erfc`; absolute error is at the level of a few ulps on (1e-300, 1 - 1e-16).
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let x = as241(p);
    // one Newton correction, computed on the tail that avoids cancellation
    let dens = normal_pdf(x);
    if dens <= 0.0 || !x.is_finite() {
        return x;
    }
    let resid = if p < 0.5 {
        normal_cdf(x) - p
    } else {
        (1.0 - p) - normal_sf(x)
    };
    x - resid / dens
}

fn as241(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
                + 6.726_577_092_700_87e4)
                * r
                + 4.592_195_393_154_987e4)
                * r
                + 1.373_169_376_550_946e4)
                * r
                + 1.971_590_950_306_551_3e3)
                * r
                + 1.331_416_678_917_843_8e2)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r
                + 3.930_789_580_009_271e4)
                * r
                + 2.121_379_430_158_659_7e4)
                * r
                + 5.394_196_021_424_751e3)
                * r
                + 6.871_870_074_920_579e2)
                * r
                + 4.231_333_070_160_091e1)
                * r
                + 1.0);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        (((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_8e-9 * r + 5.475_938_084_995_345e-4) * r
                + 1.519_866_656_361_645_7e-2)
                * r
                + 1.481_039_764_274_800_8e-1)
                * r
                + 6.897_673_349_851e-1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        let r = r - 5.0;
        (((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 1.487_536_129_085_061_5e-2)
                * r
                + 1.369_298_809_227_358e-1)
                * r
                + 5.998_322_065_558_88e-1)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Bivariate standard normal CDF `P(X ≤ h, Y ≤ k)` with correlation `rho`.
///
/// Integrates `φ(s) Φ((k - ρ s)/√(1-ρ²))` over `s ≤ h` with adaptive
/// Gauss–Kronrod at absolute tolerance `1e-14`, truncating the lower limit at -10.
pub fn bivariate_normal_cdf(h: f64, k: f64, rho: f64) -> f64 {
    if h == f64::NEG_INFINITY || k == f64::NEG_INFINITY {
        return 0.0;
    }
    if h == f64::INFINITY {
        return normal_cdf(k);
    }
    if k == f64::INFINITY {
        return normal_cdf(h);
    }
    if rho == 0.0 {
        return normal_cdf(h) * normal_cdf(k);
    }
    // integrate over the shorter tail: P(X≤h,Y≤k) = Φ(k) - P(X' ≤ -h, Y ≤ k) with X' = -X
    if h > 0.0 {
        let rest = lower_tail_integral(-h, k, -rho);
        return (normal_cdf(k) - rest).clamp(0.0, 1.0);
    }
    lower_tail_integral(h, k, rho).clamp(0.0, 1.0)
}

fn lower_tail_integral(h: f64, k: f64, rho: f64) -> f64 {
    if h <= LOWER_CUTOFF {
        return 0.0;
    }
    let s = (1.0 - rho * rho).sqrt();
    let f = |x: f64| normal_pdf(x) * normal_cdf((k - rho * x) / s);
    adaptive_gk15(f, LOWER_CUTOFF, h, 1e-14, 400)
        .unwrap_or_else(|_| {
            // fall back to a dense fixed rule; the integrand is smooth and bounded
            crate::quadrature::GaussLegendre::new(256).integrate(LOWER_CUTOFF, h, f)
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_known_values() {
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
        assert!((normal_quantile(0.95) - 1.644_853_626_951_472_2).abs() < 1e-14);
        assert!((normal_quantile(0.5)).abs() < 1e-16);
        assert!((normal_quantile(1e-10) + 6.361_340_902_404_056).abs() < 1e-11);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() < 2e-16 * p.max(1e-3) * 10.0 + 1e-16);
        }
    }

    #[test]
    fn bivariate_normal_symmetries() {
        // P(X≤0, Y≤0) = 1/4 + asin(ρ)/(2π)
        for &rho in &[-0.95, -0.5, 0.1, 0.7, 0.99] {
            let exact = 0.25 + (rho as f64).asin() / (2.0 * PI);
            assert!((bivariate_normal_cdf(0.0, 0.0, rho) - exact).abs() < 1e-13);
        }
        let a = bivariate_normal_cdf(0.3, -1.2, 0.4);
        let b = bivariate_normal_cdf(-1.2, 0.3, 0.4);
        assert!((a - b).abs() < 1e-13);
    }
}
