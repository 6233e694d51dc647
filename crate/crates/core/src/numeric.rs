//! Small scalar helpers shared across modules.

use core::f64::consts::{PI, TAU};

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_pi(a: f64) -> f64 {
    let mut w = (a + PI) % TAU;
    if w < 0.0 {
        w += TAU;
    }
    let w = w - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Piecewise-linear interpolation on increasing `xs`, clamped at the ends.
pub fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|v| *v <= x).clamp(1, n - 1);
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + t * (ys[i] - ys[i - 1])
}

/// Bisection on a sign-changing bracket; `None` if the signs agree.
pub fn bisect_root<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    mut a: f64,
    mut b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<Option<f64>, E> {
    let fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(Some(a));
    }
    if fb == 0.0 {
        return Ok(Some(b));
    }
    if fa.signum() == fb.signum() {
        return Ok(None);
    }
    let sa = fa.signum();
    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(Some(m));
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
        if (b - a).abs() < xtol {
            break;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_pi(PI), PI);
        assert_eq!(wrap_pi(-PI), PI);
        assert!((wrap_pi(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_pi(0.25)).eq(&0.25));
    }

    #[test]
    fn interp_clamps() {
        let xs = [0.0, 1.0, 3.0];
        let ys = [1.0, 2.0, 0.0];
        assert_eq!(interp(&xs, &ys, -1.0), 1.0);
        assert_eq!(interp(&xs, &ys, 2.0), 1.0);
        assert_eq!(interp(&xs, &ys, 9.0), 0.0);
        assert_eq!(interp(&xs, &ys, 1.0), 2.0);
    }

    #[test]
    fn root_of_cubic() {
        let r = bisect_root(|x| Ok::<_, ()>(x * x * x - 2.0), 0.0, 2.0, 1e-14, 200)
            .unwrap()
            .unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
        assert!(bisect_root(|x| Ok::<_, ()>(x * x + 1.0), -1.0, 1.0, 1e-12, 50).unwrap().is_none());
    }
}
