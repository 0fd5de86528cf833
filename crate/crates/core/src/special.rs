//! Error-function helpers: Gaussian tails and the inverse complementary
//! error function.

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal upper tail `P(Z >= z)`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Standard normal CDF `P(Z < z)`.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `P(lo <= Z < hi)` for a standard normal, evaluated on whichever tail keeps
/// the subtraction well conditioned.
pub fn normal_interval(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let p = if lo >= 0.0 {
        normal_sf(lo) - normal_sf(hi)
    } else if hi <= 0.0 {
        normal_cdf(hi) - normal_cdf(lo)
    } else {
        1.0 - normal_cdf(lo) - normal_sf(hi)
    };
    p.max(0.0)
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse of `erfc` on `(0, 2)`.
///
/// Starts from the rational approximation in `statrs` and polishes with
/// Halley steps on `erfc(x) - y`.
pub fn erfc_inv(y: f64) -> f64 {
    if y <= 0.0 {
        return f64::INFINITY;
    }
    if y >= 2.0 {
        return f64::NEG_INFINITY;
    }
    if y == 1.0 {
        return 0.0;
    }
    let mut x = statrs::function::erf::erfc_inv(y);
    for _ in 0..3 {
        let f = erfc(x) - y;
        // d/dx erfc = -2/sqrt(pi) exp(-x^2); Halley correction uses f'' = -2x f'
        let d = -FRAC_2_SQRT_PI * (-x * x).exp();
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let step = f / d;
        let corrected = step / (1.0 + x * step);
        if !corrected.is_finite() {
            break;
        }
        x -= corrected;
        if corrected.abs() <= 1e-17 * x.abs().max(1e-300) {
            break;
        }
    }
    x
}

/// Inverse of `erf` on `(-1, 1)`.
pub fn erf_inv(y: f64) -> f64 {
    if y <= -1.0 {
        return f64::NEG_INFINITY;
    }
    if y >= 1.0 {
        return f64::INFINITY;
    }
    if y >= 0.0 {
        erfc_inv(1.0 - y)
    } else {
        -erfc_inv(1.0 + y)
    }
}
