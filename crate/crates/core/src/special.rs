//! Analytic CDFs and quantiles for the normal and gamma families.
//!
//! Used by the synthetic generator (gamma precipitation transform) and by the
//! analytic CPF oracle. Nothing in the index computations depends on them.

use core::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * libm::exp(-0.5 * z * z)
}

/// Standard normal quantile (Acklam's rational approximation followed by one
/// Halley step, giving close to full double precision).
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let x = if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement
    let e = 0.5 * libm::erfc(-x / SQRT_2) - p;
    let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(0.5 * x * x);
    x - u / (1.0 + 0.5 * x * u)
}

/// Regularized lower incomplete gamma function P(a, x).
pub fn regularized_gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_continued_fraction(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..1000 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * libm::exp(-x + a * libm::log(x) - libm::lgamma(a))
}

// Lentz's method for the upper tail Q(a, x).
fn gamma_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    libm::exp(-x + a * libm::log(x) - libm::lgamma(a)) * h
}

/// Gamma CDF with the shape/scale parameterisation.
pub fn gamma_cdf(x: f64, shape: f64, scale: f64) -> f64 {
    regularized_gamma_p(shape, x / scale)
}

/// Gamma density with the shape/scale parameterisation.
pub fn gamma_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return if shape < 1.0 {
            f64::INFINITY
        } else if shape == 1.0 {
            1.0 / scale
        } else {
            0.0
        };
    }
    let z = x / scale;
    libm::exp((shape - 1.0) * libm::log(z) - z - libm::lgamma(shape)) / scale
}

/// Gamma quantile by safeguarded Newton iteration.
pub fn gamma_quantile(p: f64, shape: f64, scale: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    // Wilson-Hilferty starting point, in units of scale.
    let z = normal_quantile(p);
    let c = 1.0 / (9.0 * shape);
    let wh = shape * libm::pow(1.0 - c + z * libm::sqrt(c), 3.0);
    let mut x = if wh > 0.0 {
        wh
    } else {
        libm::pow(p * libm::tgamma(shape + 1.0), 1.0 / shape)
    };

    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for _ in 0..200 {
        let f = regularized_gamma_p(shape, x) - p;
        if f.abs() < 1e-15 {
            break;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dens = gamma_pdf(x, shape, 1.0);
        let mut next = if dens > 0.0 && dens.is_finite() {
            x - f / dens
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = if hi.is_finite() {
                0.5 * (lo + hi)
            } else {
                2.0 * x.max(1e-300)
            };
        }
        if (next - x).abs() <= 1e-15 * x.abs() {
            x = next;
            break;
        }
        x = next;
    }
    x * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Gamma, Normal};

    #[test]
    fn normal_matches_reference_values() {
        // reference values from 40-digit arithmetic, kept unrounded
        #[allow(clippy::excessive_precision)]
        let reference = [
            (-8.0, 6.2209605742717841235e-16),
            (-6.0, 9.865876450376981407e-10),
            (-5.0, 2.8665157187919391167e-7),
            (-3.6, 1.5910859015753387967e-4),
            (-2.0, 2.27501319481792072e-2),
            (-1.0, 1.5865525393145705141e-1),
            (-0.5, 3.0853753872598689636e-1),
            (0.0, 0.5),
            (0.5, 6.9146246127401310364e-1),
            (1.0, 8.4134474606854294859e-1),
            (2.0, 9.772498680518207928e-1),
            (3.6, 9.9984089140984246612e-1),
            (5.0, 9.9999971334842812081e-1),
        ];
        for (z, p) in reference {
            assert!((normal_cdf(z) - p).abs() <= 1e-14 * p, "cdf at {z}");
        }
        // statrs' erfc is only good to about 1e-11 relative in the tails
        let n = Normal::new(0.0, 1.0).unwrap();
        for i in -80..=80 {
            let z = i as f64 / 10.0;
            assert!((normal_cdf(z) - n.cdf(z)).abs() <= 1e-10 * n.cdf(z), "cdf at {z}");
        }
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            assert!((normal_quantile(p) - n.inverse_cdf(p)).abs() < 1e-9, "quantile at {p}");
        }
        assert!((normal_quantile(0.9) - 1.281_551_565_545).abs() < 1e-9);
        assert!((normal_quantile(1e-10) + 6.361_340_902_404).abs() < 1e-8);
    }

    #[test]
    fn gamma_matches_statrs() {
        for &(shape, scale) in &[(0.5, 1.0), (2.0, 5.0), (3.0, 2.0), (9.0, 1.0), (0.8, 7.5)] {
            // statrs uses shape/rate
            let g = Gamma::new(shape, 1.0 / scale).unwrap();
            for i in 1..200 {
                let x = i as f64 * scale * 0.1;
                assert!(
                    (gamma_cdf(x, shape, scale) - g.cdf(x)).abs() < 1e-12,
                    "cdf {shape} {scale} {x}"
                );
            }
            for i in 1..100 {
                let p = i as f64 / 100.0;
                let q = gamma_quantile(p, shape, scale);
                assert!((gamma_cdf(q, shape, scale) - p).abs() < 1e-12, "quantile {shape} {p}");
            }
        }
    }

    #[test]
    fn gamma_quantile_extremes() {
        assert_eq!(gamma_quantile(0.0, 2.0, 1.0), 0.0);
        assert!(gamma_quantile(1.0, 2.0, 1.0).is_infinite());
        let q = gamma_quantile(1e-9, 0.3, 1.0);
        assert!((gamma_cdf(q, 0.3, 1.0) - 1e-9).abs() < 1e-15);
    }
}
