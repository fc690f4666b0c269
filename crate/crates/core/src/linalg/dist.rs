//! Student t and Fisher F distribution functions built on the regularized
//! incomplete beta function.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx).
        let s = (std::f64::consts::PI * x).sin();
        return std::f64::consts::PI.ln() - s.abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=20_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `I_x(a, b)` where the caller also supplies `y = 1 − x` so that the
/// complement never has to be formed by subtraction.
fn beta_reg_pair(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * y.ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, y) / b
    }
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("beta shape parameters ({a}, {b})")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("beta argument {x} outside [0, 1]")));
    }
    Ok(beta_reg_pair(a, b, x, 1.0 - x))
}

fn check_df(df: f64, what: &str) -> Result<()> {
    if df > 0.0 && !df.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be > 0, got {df}")))
    }
}

/// Upper tail `P(T > t)` of Student's t with `df` degrees of freedom.
pub fn student_sf(t: f64, df: f64) -> Result<f64> {
    check_df(df, "degrees of freedom")?;
    if t.is_nan() {
        return Err(Error::Domain("student_sf at NaN".into()));
    }
    Ok(student_sf_unchecked(t, df))
}

fn student_sf_unchecked(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 0.0 } else { 1.0 };
    }
    let t2 = t * t;
    let denom = df + t2;
    let half_tail = 0.5 * beta_reg_pair(0.5 * df, 0.5, df / denom, t2 / denom);
    if t >= 0.0 {
        half_tail
    } else {
        1.0 - half_tail
    }
}

pub fn student_cdf(t: f64, df: f64) -> Result<f64> {
    check_df(df, "degrees of freedom")?;
    if t.is_nan() {
        return Err(Error::Domain("student_cdf at NaN".into()));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 1.0 } else { 0.0 });
    }
    let t2 = t * t;
    let denom = df + t2;
    let half_tail = 0.5 * beta_reg_pair(0.5 * df, 0.5, df / denom, t2 / denom);
    Ok(if t >= 0.0 { 1.0 - half_tail } else { half_tail })
}

/// Inverts [`student_cdf`] by bracketing and bisection on the tail
/// probability.
pub fn student_quantile(q: f64, df: f64) -> Result<f64> {
    check_df(df, "degrees of freedom")?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("quantile level {q} outside (0, 1)")));
    }
    if q == 0.5 {
        return Ok(0.0);
    }
    let tail = if q > 0.5 { 1.0 - q } else { q };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while student_sf_unchecked(hi, df) > tail {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Domain(format!("quantile {q} not bracketed")));
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if student_sf_unchecked(mid, df) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    Ok(if q > 0.5 { t } else { -t })
}

/// `P(F ≤ x)` for Fisher's F with `(d1, d2)` degrees of freedom.
pub fn f_cdf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    check_df(d1, "numerator degrees of freedom")?;
    check_df(d2, "denominator degrees of freedom")?;
    if x.is_nan() {
        return Err(Error::Domain("f_cdf at NaN".into()));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let denom = d1 * x + d2;
    Ok(beta_reg_pair(0.5 * d1, 0.5 * d2, d1 * x / denom, d2 / denom))
}

/// Upper tail `P(F > x)`, accurate for small p-values.
pub fn f_sf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    check_df(d1, "numerator degrees of freedom")?;
    check_df(d2, "denominator degrees of freedom")?;
    if x.is_nan() {
        return Err(Error::Domain("f_sf at NaN".into()));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let denom = d1 * x + d2;
    Ok(beta_reg_pair(0.5 * d2, 0.5 * d1, d2 / denom, d1 * x / denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        // ln(9!) = ln 362880
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn student_center_is_half() {
        assert_eq!(student_cdf(0.0, 7.0).unwrap(), 0.5);
    }

    #[test]
    fn cauchy_quantile() {
        // t₁ is Cauchy: quantile = tan(π (q − 1/2)).
        let q = student_quantile(0.975, 1.0).unwrap();
        let exact = (std::f64::consts::PI * 0.475).tan();
        assert!((q - exact).abs() < 1e-9);
        assert!((q - 12.7062).abs() < 1e-4);
    }

    #[test]
    fn f_one_one_at_one() {
        assert!((f_cdf(1.0, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((f_sf(1.0, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn large_df_approaches_normal() {
        let q = student_quantile(0.95, 1e6).unwrap();
        assert!((1.6448..=1.6450).contains(&q), "{q}");
    }

    #[test]
    fn domain_errors() {
        assert!(student_cdf(1.0, 0.0).is_err());
        assert!(student_cdf(1.0, -2.0).is_err());
        assert!(f_cdf(1.0, 1.0, 0.0).is_err());
        assert!(student_quantile(0.0, 3.0).is_err());
        assert!(student_quantile(1.0, 3.0).is_err());
        assert!(regularized_beta(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &df in &[1.0, 2.5, 7.0, 40.0, 1000.0] {
            for &q in &[1e-6, 0.01, 0.2, 0.5, 0.7, 0.95, 0.999] {
                let t = student_quantile(q, df).unwrap();
                assert!((student_cdf(t, df).unwrap() - q).abs() < 1e-9, "df={df} q={q}");
            }
        }
    }

    #[test]
    fn uniform_beta_is_identity() {
        for &x in &[0.0, 0.1, 0.5, 0.9, 1.0] {
            assert!((regularized_beta(1.0, 1.0, x).unwrap() - x).abs() < 1e-15);
        }
    }
}
