//! Bounded one-dimensional maximization.

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9; // (sqrt(5) - 1) / 2

/// Golden-section maximization of `f` on `[lo, hi]` to absolute tolerance
/// `tol` on the argument.
///
/// The returned point is the best one actually evaluated, with the interval
/// endpoints always among the candidates, so a maximum attained on the
/// boundary is reported exactly. Ties go to the smaller argument.
pub fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    assert!(lo <= hi);
    let mut best_x = lo;
    let mut best_f = f(lo);
    let consider = |x: f64, fx: f64, best_x: &mut f64, best_f: &mut f64| {
        if fx > *best_f || (fx == *best_f && x < *best_x) {
            *best_x = x;
            *best_f = fx;
        }
    };
    let fhi = f(hi);
    consider(hi, fhi, &mut best_x, &mut best_f);

    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_GOLDEN * (b - a);
    let mut x2 = a + INV_GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    consider(x1, f1, &mut best_x, &mut best_f);
    consider(x2, f2, &mut best_x, &mut best_f);

    while b - a > tol {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_GOLDEN * (b - a);
            f1 = f(x1);
            consider(x1, f1, &mut best_x, &mut best_f);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_GOLDEN * (b - a);
            f2 = f(x2);
            consider(x2, f2, &mut best_x, &mut best_f);
        }
    }
    (best_x, best_f)
}

/// Coarse grid scan followed by golden-section refinement around the best
/// grid node. Robust against shallow side modes as long as the grid resolves
/// them. Ties on the grid go to the smaller argument.
pub fn grid_then_golden_max(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    grid_points: usize,
    tol: f64,
) -> (f64, f64) {
    assert!(grid_points >= 2);
    let step = (hi - lo) / (grid_points - 1) as f64;
    let mut best_i = 0usize;
    let mut best_f = f64::NEG_INFINITY;
    for i in 0..grid_points {
        let x = if i + 1 == grid_points { hi } else { lo + i as f64 * step };
        let fx = f(x);
        if fx > best_f {
            best_f = fx;
            best_i = i;
        }
    }
    let bracket_lo = if best_i == 0 { lo } else { lo + (best_i - 1) as f64 * step };
    let bracket_hi = if best_i + 1 >= grid_points { hi } else { lo + (best_i + 1) as f64 * step };
    golden_max(f, bracket_lo, bracket_hi.min(hi), tol)
}

/// Bisection for the switch point of a monotone predicate on `[lo, hi]`.
///
/// Requires `pred(lo) == false` and `pred(hi) == true`; returns a point
/// within `tol` of the boundary between the two regimes.
pub fn bisect_switch(pred: impl Fn(f64) -> bool, lo: f64, hi: f64, tol: f64) -> f64 {
    debug_assert!(!pred(lo) && pred(hi));
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if pred(mid) {
            b = mid;
        } else {
            a = mid;
        }
    }
    0.5 * (a + b)
}
