//! Bracketing root finders used to locate congestion onsets and interfaces.

/// Bisection on a bracket `[lo, hi]` with `f(lo)` and `f(hi)` of opposite
/// sign (or zero). Returns the midpoint once the bracket is below `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// First `t` in `[from, until]` at which `pred` switches from false to true:
/// marches with step `step`, then bisects the crossing to `tol`.
/// Returns `from` itself when the predicate already holds there.
pub fn first_crossing(
    pred: impl Fn(f64) -> bool,
    from: f64,
    until: f64,
    step: f64,
    tol: f64,
) -> Option<f64> {
    if pred(from) {
        return Some(from);
    }
    let n = ((until - from) / step).ceil().max(0.0) as u64;
    let mut prev = from;
    for k in 1..=n {
        let t = (from + k as f64 * step).min(until);
        if pred(t) {
            let (mut lo, mut hi) = (prev, t);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if pred(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(hi);
        }
        prev = t;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
        assert_eq!(bisect(|x| x, 0.0, 1.0, 1e-12), Some(0.0));
    }

    #[test]
    fn crossing_scan() {
        let t = first_crossing(|t| t.sin() > 0.5, 0.0, 3.0, 1e-4, 1e-12).unwrap();
        assert!((t - std::f64::consts::FRAC_PI_6).abs() < 1e-11);
        assert_eq!(first_crossing(|t| t > -1.0, 0.0, 1.0, 0.1, 1e-9), Some(0.0));
        assert!(first_crossing(|t| t > 5.0, 0.0, 1.0, 0.1, 1e-9).is_none());
    }
}
