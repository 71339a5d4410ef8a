//! Safeguarded Newton for strictly increasing scalar profiles.

/// Solves `g(s) = y` for `s >= 0` given strictly increasing `g` with
/// `g(0) = 0 < y`, derivative `dg`, and an initial upper estimate `hi0`.
///
/// The bracket is grown geometrically until it encloses the root; Newton
/// iterates inside it and falls back to bisection on overshoot. Terminates
/// at absolute-plus-relative tolerance 1e-13.
pub fn monotone_root<G, D>(g: G, dg: D, y: f64, hi0: f64) -> f64
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    debug_assert!(y > 0.0);
    let mut lo = 0.0f64;
    let mut hi = hi0.max(y).max(f64::MIN_POSITIVE);
    let mut ghi = g(hi);
    while ghi < y {
        lo = hi;
        hi *= 2.0;
        ghi = g(hi);
        debug_assert!(hi.is_finite(), "bracket growth diverged");
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gs = g(s) - y;
        if gs > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let d = dg(s);
        let newton = s - gs / d;
        s = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo) <= 1e-13 * (1.0 + s.abs()) {
            break;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let r = monotone_root(|s| s * s * s + s, |s| 3.0 * s * s + 1.0, 10.0, 1.0);
        assert!((r * r * r + r - 10.0).abs() < 1e-10);
    }

    #[test]
    fn grows_bracket_when_needed() {
        // g(s) = s^(1/4): root of y = 5.6 is s ~ 983, far above hi0 = 1
        let r = monotone_root(|s: f64| s.powf(0.25), |s: f64| 0.25 * s.powf(-0.75), 5.6, 1.0);
        assert!((r.powf(0.25) - 5.6).abs() < 1e-9);
    }
}
