//! Brute-force dip for small samples, straight from the definition.
//!
//! For a candidate distance `d` the unimodal fits are constrained to the band
//! `F(x) - d <= U(x) <= F(x-) + d` at every distinct sample value (between
//! sample values `F` is flat and `U` monotone, so the knots are the only
//! binding points). A unimodal `U` is convex up to some knot `p` and concave
//! after it, and the two halves only have to agree on `U(x_p)`. For each `p`
//! the feasible values of `U(x_p)` are found from the greatest convex function
//! under the upper band (left half) and the least concave function over the
//! lower band (right half). The smallest feasible `d` is located by bisection.
//!
//! The unimodal candidates here are continuous, so samples with tied values
//! are measured against a slightly different definition than the ranks-based
//! fast path uses; compare the two on samples with distinct values.

use crate::error::{Error, Result};

pub const MAX_SIZE: usize = 12;

const BISECTIONS: usize = 64;
const SLACK: f64 = 1e-15;

/// Greatest convex minorant of the points `(xs[i], ys[i])`, evaluated at `xs`.
fn convex_minorant(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(xs.len());
    for (&x, &y) in xs.iter().zip(ys) {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            if (y2 - y1) * (x - x1) >= (y - y1) * (x2 - x1) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    let mut out = Vec::with_capacity(xs.len());
    let mut seg = 0;
    for &x in xs {
        while seg + 1 < hull.len() && hull[seg + 1].0 < x {
            seg += 1;
        }
        if seg + 1 == hull.len() || hull[seg].0 == x {
            out.push(hull[seg].1);
        } else {
            let (x1, y1) = hull[seg];
            let (x2, y2) = hull[seg + 1];
            out.push(y1 + (y2 - y1) * (x - x1) / (x2 - x1));
        }
    }
    out
}

struct Band<'a> {
    xs: &'a [f64],
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Band<'_> {
    // Convex, nondecreasing on 0..=p, inside the band, ending at u.
    fn left_fits(&self, p: usize, u: f64) -> bool {
        let mut ys: Vec<f64> = self.upper[..=p].iter().map(|&h| h.min(u)).collect();
        ys[p] = u;
        convex_minorant(&self.xs[..=p], &ys)
            .iter()
            .zip(&self.lower[..=p])
            .all(|(g, l)| *g >= l - SLACK)
    }

    // Concave, nondecreasing on p.., inside the band, starting at u.
    fn right_fits(&self, p: usize, u: f64) -> bool {
        let mut ys: Vec<f64> = self.lower[p..].iter().map(|&l| -(l.max(u))).collect();
        ys[0] = -u;
        convex_minorant(&self.xs[p..], &ys)
            .iter()
            .zip(&self.upper[p..])
            .all(|(g, h)| -g <= h + SLACK)
    }

    fn feasible_at(&self, p: usize) -> bool {
        let (lo, hi) = (self.lower[p], self.upper[p]);
        if !self.left_fits(p, hi) || !self.right_fits(p, lo) {
            return false;
        }
        // Left-feasible values of U(x_p) form [u_min, hi]; right-feasible
        // ones form [lo, u_max]. They intersect iff u_min is right-feasible.
        let u_min = if self.left_fits(p, lo) {
            lo
        } else {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..BISECTIONS {
                let c = 0.5 * (a + b);
                if self.left_fits(p, c) {
                    b = c;
                } else {
                    a = c;
                }
            }
            b
        };
        self.right_fits(p, u_min)
    }
}

fn feasible(xs: &[f64], f_right: &[f64], f_left: &[f64], d: f64) -> bool {
    let band = Band {
        xs,
        lower: f_right.iter().map(|f| (f - d).max(0.0)).collect(),
        upper: f_left.iter().map(|f| (f + d).min(1.0)).collect(),
    };
    if band
        .lower
        .iter()
        .zip(&band.upper)
        .any(|(l, h)| *l > h + SLACK)
    {
        return false;
    }
    (0..xs.len()).any(|p| band.feasible_at(p))
}

/// The dip of a sample of 2 to 12 values (any order).
pub fn dip_reference(sample: &[f64]) -> Result<f64> {
    let m = sample.len();
    if !(2..=MAX_SIZE).contains(&m) {
        return Err(Error::invalid(
            "sample",
            format!("reference dip needs 2..={MAX_SIZE} values, got {m}"),
        ));
    }
    if let Some(i) = sample.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);

    let mut xs = Vec::new();
    let mut f_right = Vec::new();
    let mut f_left = Vec::new();
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j + 1 < m && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        xs.push(sorted[i]);
        f_left.push(i as f64 / m as f64);
        f_right.push((j + 1) as f64 / m as f64);
        i = j + 1;
    }
    if xs.len() == 1 {
        return Ok(0.0);
    }

    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if feasible(&xs, &f_right, &f_left, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
