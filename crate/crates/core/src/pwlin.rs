//! Exact algebra of compactly supported, continuous piecewise-linear
//! functions over an ordered field.
//!
//! A function is stored as a strictly increasing list of breakpoints with
//! their ordinates; it is affine between consecutive breakpoints and
//! identically zero outside the first and last one. Continuity with the zero
//! extension forces the first and last ordinate to vanish, which makes every
//! value of this type an element of L²(ℝ) by construction.
//!
//! All values are kept in canonical form (no redundant breakpoint, leading
//! and trailing zero plateaus trimmed, the zero function is the empty list),
//! so structural equality decides function equality.

use std::fmt::Write as _;

use thiserror::Error;

use crate::scalar::{small, ExactScalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PwlinError {
    #[error("breakpoints must be strictly increasing (violation at index {0})")]
    UnsortedBreakpoints(usize),
    #[error("a compactly supported continuous function must start and end at zero")]
    NonzeroEnds,
    #[error("coefficient and function lists must have equal nonzero length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("moment interval requires a < b")]
    EmptyInterval,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Compactly supported continuous piecewise-linear function with exact
/// breakpoints and values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseLinear<T> {
    /// `(breakpoint, value)` pairs, canonical. Empty list is the zero function.
    points: Vec<(T, T)>,
}

impl<T: ExactScalar> PiecewiseLinear<T> {
    /// The zero function.
    pub fn zero() -> Self {
        Self { points: Vec::new() }
    }

    /// The tent with nodes (0,0), (1,1), (2,0): the initial state of the
    /// translation orbit used throughout the exact construction.
    pub fn tent() -> Self {
        Self {
            points: vec![
                (T::zero(), T::zero()),
                (T::one(), T::one()),
                (small(2), T::zero()),
            ],
        }
    }

    /// Build from `(breakpoint, value)` pairs, validating the invariants and
    /// reducing to canonical form.
    pub fn from_points(points: Vec<(T, T)>) -> Result<Self, PwlinError> {
        for i in 1..points.len() {
            if points[i - 1].0 >= points[i].0 {
                return Err(PwlinError::UnsortedBreakpoints(i));
            }
        }
        match points.len() {
            0 => {}
            1 => {
                if !points[0].1.is_zero() {
                    return Err(PwlinError::NonzeroEnds);
                }
            }
            n => {
                if !points[0].1.is_zero() || !points[n - 1].1.is_zero() {
                    return Err(PwlinError::NonzeroEnds);
                }
            }
        }
        Ok(Self {
            points: canonicalize(points),
        })
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }

    pub fn is_zero(&self) -> bool {
        self.points.is_empty()
    }

    /// x ↦ f(x − shift).
    pub fn translate(&self, shift: &T) -> Self {
        // Translation preserves canonical form.
        Self {
            points: self
                .points
                .iter()
                .map(|(x, v)| (x.clone() + shift.clone(), v.clone()))
                .collect(),
        }
    }

    /// Exact linear combination Σ cᵢ fᵢ in canonical form.
    pub fn combine(coeffs: &[T], fs: &[Self]) -> Result<Self, PwlinError> {
        if coeffs.len() != fs.len() || coeffs.is_empty() {
            return Err(PwlinError::LengthMismatch(coeffs.len(), fs.len()));
        }
        let mut xs: Vec<T> = fs
            .iter()
            .flat_map(|f| f.points.iter().map(|(x, _)| x.clone()))
            .collect();
        xs.sort();
        xs.dedup();
        let points: Vec<(T, T)> = xs
            .into_iter()
            .map(|x| {
                let v = coeffs
                    .iter()
                    .zip(fs)
                    .fold(T::zero(), |acc, (c, f)| acc + c.clone() * f.evaluate(&x));
                (x, v)
            })
            .collect();
        // Each fᵢ vanishes at and beyond the extremes of the breakpoint
        // union, so the end values are already zero.
        Ok(Self {
            points: canonicalize(points),
        })
    }

    /// Exact value at `x` (zero outside the support hull).
    pub fn evaluate(&self, x: &T) -> T {
        let pts = &self.points;
        if pts.is_empty() || *x < pts[0].0 || *x > pts[pts.len() - 1].0 {
            return T::zero();
        }
        // First index whose breakpoint exceeds x; x lies in segment [i-1, i].
        let i = pts.partition_point(|(bx, _)| *bx <= *x);
        if i == pts.len() {
            return pts[i - 1].1.clone();
        }
        let (x0, v0) = &pts[i - 1];
        let (x1, v1) = &pts[i];
        v0.clone()
            + (v1.clone() - v0.clone()) * (x.clone() - x0.clone()) / (x1.clone() - x0.clone())
    }

    /// Exact ∫ f·g dx over ℝ.
    ///
    /// On each interval of the merged breakpoint mesh the integrand is a
    /// quadratic, integrated in closed form from its endpoint values.
    pub fn inner_product(&self, other: &Self) -> T {
        let (f, g) = (&self.points, &other.points);
        if f.is_empty() || g.is_empty() {
            return T::zero();
        }
        let lo = ord_max(&f[0].0, &g[0].0);
        let hi = ord_min(&f[f.len() - 1].0, &g[g.len() - 1].0);
        if lo >= hi {
            return T::zero();
        }
        let mesh = merged_mesh(f, g, lo, hi);
        let two: T = small(2);
        let six: T = small(6);
        let mut acc = T::zero();
        let mut fa = self.evaluate(&mesh[0]);
        let mut ga = other.evaluate(&mesh[0]);
        for i in 1..mesh.len() {
            let fb = self.evaluate(&mesh[i]);
            let gb = other.evaluate(&mesh[i]);
            let width = mesh[i].clone() - mesh[i - 1].clone();
            // ∫ over the cell of the product of two affine functions:
            // (b−a)/6 · (f_a(2g_a+g_b) + f_b(g_a+2g_b)).
            let cell = width
                * (fa.clone() * (two.clone() * ga.clone() + gb.clone())
                    + fb.clone() * (ga + two.clone() * gb.clone()))
                / six.clone();
            acc = acc + cell;
            fa = fb;
            ga = gb;
        }
        acc
    }

    /// Exact ∫ₐᵇ x·f(x) dx.
    pub fn first_moment(&self, a: &T, b: &T) -> Result<T, PwlinError> {
        if a >= b {
            return Err(PwlinError::EmptyInterval);
        }
        let pts = &self.points;
        if pts.is_empty() {
            return Ok(T::zero());
        }
        let lo = ord_max(a, &pts[0].0);
        let hi = ord_min(b, &pts[pts.len() - 1].0);
        if lo >= hi {
            return Ok(T::zero());
        }
        let mut mesh: Vec<T> = vec![lo.clone()];
        for (x, _) in pts {
            if *x > lo && *x < hi {
                mesh.push(x.clone());
            }
        }
        mesh.push(hi);
        let two: T = small(2);
        let three: T = small(3);
        let mut acc = T::zero();
        for w in mesh.windows(2) {
            let (l, r) = (&w[0], &w[1]);
            let fl = self.evaluate(l);
            let fr = self.evaluate(r);
            // f = c + d·x on [l, r]; ∫ x f = c(r²−l²)/2 + d(r³−l³)/3.
            let d = (fr - fl.clone()) / (r.clone() - l.clone());
            let c = fl - d.clone() * l.clone();
            let l2 = l.clone() * l.clone();
            let r2 = r.clone() * r.clone();
            let l3 = l2.clone() * l.clone();
            let r3 = r2.clone() * r.clone();
            acc = acc + c * (r2 - l2) / two.clone() + d * (r3 - l3) / three.clone();
        }
        Ok(acc)
    }

    /// Minimal list of maximal closed intervals on which the function is not
    /// identically zero.
    pub fn support(&self) -> Vec<(T, T)> {
        let pts = &self.points;
        let mut out = Vec::new();
        let mut start: Option<T> = None;
        for i in 0..pts.len().saturating_sub(1) {
            // An affine segment with both endpoint values zero is identically
            // zero; any other segment carries mass.
            let zero_segment = pts[i].1.is_zero() && pts[i + 1].1.is_zero();
            if !zero_segment {
                if start.is_none() {
                    start = Some(pts[i].0.clone());
                }
            } else if let Some(s) = start.take() {
                out.push((s, pts[i].0.clone()));
            }
        }
        if let Some(s) = start {
            out.push((s, pts[pts.len() - 1].0.clone()));
        }
        out
    }
}

fn ord_max<T: Ord + Clone>(a: &T, b: &T) -> T {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

fn ord_min<T: Ord + Clone>(a: &T, b: &T) -> T {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Sorted union of the two breakpoint lists restricted to `(lo, hi)`, with
/// `lo` and `hi` appended as interval ends.
fn merged_mesh<T: ExactScalar>(f: &[(T, T)], g: &[(T, T)], lo: T, hi: T) -> Vec<T> {
    let mut mesh = Vec::with_capacity(f.len() + g.len() + 2);
    mesh.push(lo.clone());
    let (mut i, mut j) = (0, 0);
    loop {
        let fx = f.get(i).map(|(x, _)| x);
        let gx = g.get(j).map(|(x, _)| x);
        let x = match (fx, gx) {
            (Some(a), Some(b)) => {
                if a <= b {
                    i += 1;
                    if a == b {
                        j += 1;
                    }
                    a.clone()
                } else {
                    j += 1;
                    b.clone()
                }
            }
            (Some(a), None) => {
                i += 1;
                a.clone()
            }
            (None, Some(b)) => {
                j += 1;
                b.clone()
            }
            (None, None) => break,
        };
        if x > lo && x < hi {
            mesh.push(x);
        }
    }
    mesh.push(hi);
    mesh
}

/// Reduce a validated breakpoint list to canonical form: all-zero lists
/// become empty, redundant leading/trailing zero breakpoints are trimmed and
/// interior breakpoints where the slope does not change are dropped.
fn canonicalize<T: ExactScalar>(mut pts: Vec<(T, T)>) -> Vec<(T, T)> {
    if pts.iter().all(|(_, v)| v.is_zero()) {
        return Vec::new();
    }
    while pts.len() >= 2 && pts[0].1.is_zero() && pts[1].1.is_zero() {
        pts.remove(0);
    }
    while pts.len() >= 2 && pts[pts.len() - 1].1.is_zero() && pts[pts.len() - 2].1.is_zero() {
        pts.pop();
    }
    let mut out: Vec<(T, T)> = Vec::with_capacity(pts.len());
    for p in pts {
        while out.len() >= 2 {
            let b = &out[out.len() - 1];
            let a = &out[out.len() - 2];
            // b is redundant iff slope(a→b) equals slope(b→p); compare
            // cross-multiplied to stay division-free.
            let lhs = (b.1.clone() - a.1.clone()) * (p.0.clone() - b.0.clone());
            let rhs = (p.1.clone() - b.1.clone()) * (b.0.clone() - a.0.clone());
            if lhs == rhs {
                out.pop();
            } else {
                break;
            }
        }
        out.push(p);
    }
    out
}

/// Exact text serialization for the `BigRational` instantiation.
///
/// Format: a `pwlin v1` header, the point count, then one `p/q p/q`
/// (breakpoint, value) line per point. Round-trips exactly.
impl PiecewiseLinear<num_rational::BigRational> {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "pwlin v1");
        let _ = writeln!(s, "{}", self.points.len());
        for (x, v) in &self.points {
            let _ = writeln!(
                s,
                "{} {}",
                crate::rat::rational_string(x),
                crate::rat::rational_string(v)
            );
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, PwlinError> {
        let mut lines = text.lines().enumerate();
        let parse_err = |line: usize, msg: String| PwlinError::Parse {
            line: line + 1,
            msg,
        };
        let (i, header) = lines
            .next()
            .ok_or_else(|| parse_err(0, "empty input".into()))?;
        if header.trim() != "pwlin v1" {
            return Err(parse_err(i, format!("expected `pwlin v1`, got `{header}`")));
        }
        let (i, count_line) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing point count".into()))?;
        let n: usize = count_line
            .trim()
            .parse()
            .map_err(|e| parse_err(i, format!("bad point count: {e}")))?;
        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            let (i, line) = lines
                .next()
                .ok_or_else(|| parse_err(n + 1, "unexpected end of input".into()))?;
            let mut fields = line.split_whitespace();
            let x = fields
                .next()
                .ok_or_else(|| parse_err(i, "missing breakpoint".into()))
                .and_then(|s| {
                    crate::rat::parse_rational(s).map_err(|e| parse_err(i, e.to_string()))
                })?;
            let v = fields
                .next()
                .ok_or_else(|| parse_err(i, "missing value".into()))
                .and_then(|s| {
                    crate::rat::parse_rational(s).map_err(|e| parse_err(i, e.to_string()))
                })?;
            if fields.next().is_some() {
                return Err(parse_err(i, "trailing fields on point line".into()));
            }
            points.push((x, v));
        }
        Self::from_points(points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rational as q;
    use crate::PwLin;

    #[test]
    fn tent_values() {
        let t = PwLin::tent();
        assert_eq!(t.evaluate(&q(1, 1)), q(1, 1));
        assert_eq!(t.evaluate(&q(0, 1)), q(0, 1));
        assert_eq!(t.evaluate(&q(2, 1)), q(0, 1));
        assert_eq!(t.evaluate(&q(1, 2)), q(1, 2));
        assert_eq!(t.evaluate(&q(3, 2)), q(1, 2));
        assert_eq!(t.evaluate(&q(-5, 1)), q(0, 1));
        assert_eq!(t.evaluate(&q(7, 3)), q(0, 1));
    }

    #[test]
    fn translate_is_a_group_action() {
        let t = PwLin::tent();
        assert_eq!(t.translate(&q(0, 1)), t);
        let s = t.translate(&q(1, 3)).translate(&q(2, 5));
        assert_eq!(s, t.translate(&q(11, 15)));
        // Peak moves with the shift.
        assert_eq!(t.translate(&q(1, 3)).evaluate(&q(4, 3)), q(1, 1));
    }

    #[test]
    fn combine_identity_and_cancellation() {
        let t = PwLin::tent();
        let same = PwLin::combine(&[q(1, 1)], std::slice::from_ref(&t)).unwrap();
        assert_eq!(same, t);
        let zero = PwLin::combine(&[q(1, 1), q(-1, 1)], &[t.clone(), t.clone()]).unwrap();
        assert!(zero.is_zero());
        assert!(PwLin::combine(&[q(1, 1)], &[]).is_err());
    }

    #[test]
    fn tent_inner_product_is_two_thirds() {
        // Oracle: ∫₀¹ x² dx + ∫₁² (2−x)² dx = 1/3 + 1/3.
        let t = PwLin::tent();
        assert_eq!(t.inner_product(&t), q(2, 3));
    }

    #[test]
    fn inner_product_is_symmetric_and_translation_invariant() {
        let t = PwLin::tent();
        let u = t.translate(&q(1, 2));
        assert_eq!(t.inner_product(&u), u.inner_product(&t));
        let s = q(-7, 11);
        assert_eq!(
            t.translate(&s).inner_product(&u.translate(&s)),
            t.inner_product(&u)
        );
    }

    #[test]
    fn first_moment_of_tent() {
        // Oracle: ∫₀¹ x·x dx + ∫₁² x(2−x) dx = 1/3 + 2/3 = 1.
        let t = PwLin::tent();
        assert_eq!(t.first_moment(&q(0, 1), &q(2, 1)).unwrap(), q(1, 1));
        assert_eq!(
            PwLin::zero().first_moment(&q(0, 1), &q(9, 1)).unwrap(),
            q(0, 1)
        );
        assert!(t.first_moment(&q(1, 1), &q(1, 1)).is_err());
        assert!(t.first_moment(&q(2, 1), &q(1, 1)).is_err());
    }

    #[test]
    fn support_of_zero_and_tent() {
        assert!(PwLin::zero().support().is_empty());
        assert_eq!(PwLin::tent().support(), vec![(q(0, 1), q(2, 1))]);
    }

    #[test]
    fn support_splits_at_zero_plateaus() {
        let f = PwLin::from_points(vec![
            (q(0, 1), q(0, 1)),
            (q(1, 1), q(1, 1)),
            (q(2, 1), q(0, 1)),
            (q(5, 1), q(0, 1)),
            (q(6, 1), q(-2, 1)),
            (q(7, 1), q(0, 1)),
        ])
        .unwrap();
        assert_eq!(f.support(), vec![(q(0, 1), q(2, 1)), (q(5, 1), q(7, 1))]);
    }

    #[test]
    fn canonicalization_drops_redundant_points() {
        // Midpoint of a straight segment and an outer zero plateau.
        let f = PwLin::from_points(vec![
            (q(-1, 1), q(0, 1)),
            (q(0, 1), q(0, 1)),
            (q(1, 2), q(1, 2)),
            (q(1, 1), q(1, 1)),
            (q(2, 1), q(0, 1)),
        ])
        .unwrap();
        assert_eq!(f, PwLin::tent());
    }

    #[test]
    fn from_points_rejects_invalid_input() {
        assert!(matches!(
            PwLin::from_points(vec![(q(1, 1), q(0, 1)), (q(0, 1), q(0, 1))]),
            Err(PwlinError::UnsortedBreakpoints(1))
        ));
        assert!(matches!(
            PwLin::from_points(vec![(q(0, 1), q(1, 1)), (q(1, 1), q(0, 1))]),
            Err(PwlinError::NonzeroEnds)
        ));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let f = PwLin::tent().translate(&q(-3, 7));
        let text = f.to_text();
        let back = PwLin::from_text(&text).unwrap();
        assert_eq!(f, back);
        assert!(text.starts_with("pwlin v1\n3\n"));
        assert!(PwLin::from_text("pwlin v2\n0\n").is_err());
        assert!(PwLin::from_text("pwlin v1\n1\n0.5 0/1\n").is_err());
    }

    #[test]
    fn generic_over_machine_rationals() {
        // The algebra works for any exact ordered field, not just BigRational.
        type R64 = num_rational::Ratio<i64>;
        let t = PiecewiseLinear::<R64>::tent();
        assert_eq!(t.inner_product(&t), R64::new(2, 3));
    }
}
