//! Pearson correlation with a two-sided t-test p-value.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn lit<T: Float>(v: f64) -> T {
    T::from(v).expect("float literal")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult<T> {
    pub r: T,
    pub p_value: T,
    pub n: usize,
}

/// ln Γ(x) for x > 0 (Lanczos, g = 7, n = 9).
pub fn ln_gamma<T: Float>(x: T) -> T {
    const COEF: [f64; 9] = [
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
    let half = lit::<T>(0.5);
    if x < half {
        // reflection
        let pi = lit::<T>(std::f64::consts::PI);
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut a = lit::<T>(COEF[0]);
    let t = x + lit(7.5);
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a = a + lit::<T>(c) / (x + lit(i as f64));
    }
    lit::<T>(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + half) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf<T: Float>(a: T, b: T, x: T) -> T {
    let tiny = lit::<T>(1e-300).max(T::min_positive_value());
    let eps = T::epsilon();
    let one = T::one();
    let (qab, qap, qam) = (a + b, a + one, a - one);
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = lit::<T>(m as f64);
        let m2 = m + m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let del = d * c;
        h = h * del;
        if (del - one).abs() <= eps {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b).
pub fn incomplete_beta<T: Float>(a: T, b: T, x: T) -> T {
    let one = T::one();
    if x <= T::zero() {
        return T::zero();
    }
    if x >= one {
        return one;
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (one - x).ln()).exp();
    if x < (a + one) / (a + b + lit(2.0)) {
        front * beta_cf(a, b, x) / a
    } else {
        one - front * beta_cf(b, a, one - x) / b
    }
}

/// Two-sided p-value of Student's t with `df` degrees of freedom.
pub fn t_test_p_value<T: Float>(t: T, df: T) -> T {
    if t.is_infinite() {
        return T::zero();
    }
    incomplete_beta(df / lit(2.0), lit(0.5), df / (df + t * t))
}

pub fn pearson<T: Float>(xs: &[T], ys: &[T]) -> Result<CorrelationResult<T>> {
    if xs.len() != ys.len() {
        return Err(Error::Usage(format!("{} xs but {} ys", xs.len(), ys.len())));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::Usage(format!("correlation needs at least 3 samples, got {n}")));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Usage("correlation input is not finite".into()));
    }
    let nf = lit::<T>(n as f64);
    let mean = |v: &[T]| v.iter().copied().fold(T::zero(), |a, b| a + b) / nf;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        let which = if sxx == T::zero() { "first" } else { "second" };
        return Err(Error::UndefinedCorrelation(format!("the {which} variable has zero variance")));
    }
    let r = (sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one());
    let df = lit::<T>((n - 2) as f64);
    let p_value = if r.abs() == T::one() {
        T::zero()
    } else {
        let t = r * (df / (T::one() - r * r)).sqrt();
        t_test_p_value(t, df).max(T::zero()).min(T::one())
    };
    Ok(CorrelationResult { r, p_value, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((ln_gamma(5.0f64) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5f64) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, 1) = x and I_x(a, 1) = x^a
        assert!((incomplete_beta(1.0f64, 1.0, 0.3) - 0.3).abs() < 1e-14);
        assert!((incomplete_beta(2.5f64, 1.0, 0.6) - 0.6f64.powf(2.5)).abs() < 1e-13);
    }

    #[test]
    fn t_distribution_tail() {
        // df = 1 is Cauchy: P(|T| > 1) = 1/2
        assert!((t_test_p_value(1.0f64, 1.0) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn perfect_and_reference_correlations() {
        let c = pearson(&[1.0f64, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((c.r - 1.0).abs() < 1e-12 && c.p_value < 1e-9, "{c:?}");
        let c = pearson(&[1.0f64, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap();
        assert!((c.r + 1.0).abs() < 1e-12);
        let c = pearson(&[1.0f64, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
        assert!((c.r - 0.8).abs() < 1e-12);
        assert!((c.p_value - 0.104_088_038_661_8).abs() < 1e-9, "{}", c.p_value);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(pearson(&[1.0f64, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::UndefinedCorrelation(_))));
        assert!(matches!(pearson(&[1.0f64, 2.0], &[1.0, 2.0]), Err(Error::Usage(_))));
    }
}
