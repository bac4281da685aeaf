//! Circle packing in the unit square.
//!
//! Siblings are placed tangent to one another along a moving front chain,
//! then wrapped in their smallest enclosing circle, which is scaled onto the
//! parent. Sibling radii are proportional to `sqrt(weight + MIN_WEIGHT)`
//! within one parent, so a larger weight always gets a strictly larger
//! circle and a zero weight still gets a visible one.

use serde::{Deserialize, Serialize};

use super::{CircleNode, NodeLevel};

pub const MIN_WEIGHT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

impl Circle {
    pub fn new(x: f64, y: f64, r: f64) -> Circle {
        Circle { x, y, r }
    }

    fn dist(&self, o: &Circle) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutCircle {
    pub ref_id: String,
    pub level: NodeLevel,
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub children: Vec<LayoutCircle>,
}

impl LayoutCircle {
    pub fn circle(&self) -> Circle {
        Circle::new(self.x, self.y, self.r)
    }

    pub fn walk(&self) -> Vec<&LayoutCircle> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }
}

/// Lays out `node`'s subtree with `node` as the circle of radius 0.5
/// centred in the unit square. Children are ordered by descending weight,
/// ties by `ref_id`.
pub fn pack(node: &CircleNode) -> LayoutCircle {
    layout(node, Circle::new(0.5, 0.5, 0.5))
}

fn layout(node: &CircleNode, at: Circle) -> LayoutCircle {
    let mut order: Vec<&CircleNode> = node.children.iter().collect();
    order.sort_by(|a, b| b.weight.cmp(&a.weight).then_with(|| a.ref_id.cmp(&b.ref_id)));

    let mut circles: Vec<Circle> =
        order.iter().map(|c| Circle::new(0.0, 0.0, (c.weight as f64 + MIN_WEIGHT).sqrt())).collect();
    let children = if circles.is_empty() {
        Vec::new()
    } else {
        let enclosing = pack_siblings(&mut circles);
        let scale = at.r / enclosing;
        order
            .iter()
            .zip(&circles)
            .map(|(child, c)| {
                layout(child, Circle::new(at.x + c.x * scale, at.y + c.y * scale, c.r * scale))
            })
            .collect()
    };
    LayoutCircle { ref_id: node.ref_id.clone(), level: node.level, x: at.x, y: at.y, r: at.r, children }
}

fn place(b: &Circle, a: &Circle, c: &mut Circle) {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let d2 = dx * dx + dy * dy;
    if d2 > 0.0 {
        let a2 = (a.r + c.r) * (a.r + c.r);
        let b2 = (b.r + c.r) * (b.r + c.r);
        if a2 > b2 {
            let x = (d2 + b2 - a2) / (2.0 * d2);
            let y = (b2 / d2 - x * x).max(0.0).sqrt();
            c.x = b.x - x * dx - y * dy;
            c.y = b.y - x * dy + y * dx;
        } else {
            let x = (d2 + a2 - b2) / (2.0 * d2);
            let y = (a2 / d2 - x * x).max(0.0).sqrt();
            c.x = a.x + x * dx - y * dy;
            c.y = a.y + x * dy + y * dx;
        }
    } else {
        c.x = a.x + c.r;
        c.y = a.y;
    }
}

fn intersects(a: &Circle, b: &Circle) -> bool {
    let dr = (a.r + b.r) * (1.0 - 1e-9);
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    dr > 0.0 && dr * dr > dx * dx + dy * dy
}

/// Weighted midpoint of a front-chain link, squared distance from origin.
fn score(a: &Circle, b: &Circle) -> f64 {
    let ab = a.r + b.r;
    let dx = (a.x * b.r + b.x * a.r) / ab;
    let dy = (a.y * b.r + b.y * a.r) / ab;
    dx * dx + dy * dy
}

/// Packs `circles` (radii given, positions overwritten) so that no two
/// overlap, then translates them so their smallest enclosing circle is
/// centred on the origin. Returns that circle's radius.
pub fn pack_siblings(circles: &mut [Circle]) -> f64 {
    let n = circles.len();
    if n == 0 {
        return 0.0;
    }
    circles[0].x = 0.0;
    circles[0].y = 0.0;
    if n == 1 {
        return circles[0].r;
    }
    circles[0].x = -circles[1].r;
    circles[1].x = circles[0].r;
    circles[1].y = 0.0;
    if n > 2 {
        let (head, tail) = circles.split_at_mut(2);
        place(&head[1], &head[0], &mut tail[0]);

        // Front chain as a circular doubly linked list over circle indices.
        let mut next = vec![0usize; n];
        let mut prev = vec![0usize; n];
        let (mut a, mut b) = (0usize, 1usize);
        next[0] = 1;
        prev[1] = 0;
        next[1] = 2;
        prev[2] = 1;
        next[2] = 0;
        prev[0] = 2;

        let mut i = 3;
        'pack: while i < n {
            let (ca, cb) = (circles[a], circles[b]);
            place(&ca, &cb, &mut circles[i]);
            let c = circles[i];

            // Closest intersecting circle along the chain, searching both ways.
            let mut j = next[b];
            let mut k = prev[a];
            let mut sj = circles[b].r;
            let mut sk = circles[a].r;
            loop {
                if sj <= sk {
                    if intersects(&circles[j], &c) {
                        b = j;
                        next[a] = b;
                        prev[b] = a;
                        continue 'pack;
                    }
                    sj += circles[j].r;
                    j = next[j];
                } else {
                    if intersects(&circles[k], &c) {
                        a = k;
                        next[a] = b;
                        prev[b] = a;
                        continue 'pack;
                    }
                    sk += circles[k].r;
                    k = prev[k];
                }
                if j == next[k] {
                    break;
                }
            }

            // Insert i between a and b.
            prev[i] = a;
            next[i] = b;
            next[a] = i;
            prev[b] = i;
            b = i;

            // New link closest to the centroid.
            let mut best = a;
            let mut best_score = score(&circles[a], &circles[next[a]]);
            let mut cur = next[i];
            while cur != b {
                let s = score(&circles[cur], &circles[next[cur]]);
                if s < best_score {
                    best = cur;
                    best_score = s;
                }
                cur = next[cur];
            }
            a = best;
            b = next[a];
            i += 1;
        }
    }

    let e = smallest_enclosing_circle(circles);
    for c in circles.iter_mut() {
        c.x -= e.x;
        c.y -= e.y;
    }
    // Guard against rounding in the enclosing construction.
    circles.iter().map(|c| c.x.hypot(c.y) + c.r).fold(e.r, f64::max)
}

/// Smallest circle enclosing every circle in `circles` (Welzl-style move to
/// front over a basis of at most three circles).
pub fn smallest_enclosing_circle(circles: &[Circle]) -> Circle {
    let mut e: Option<Circle> = None;
    let mut basis: Vec<Circle> = Vec::new();
    let mut i = 0;
    let mut restarts = 0usize;
    while i < circles.len() {
        let p = circles[i];
        if e.is_some_and(|e| encloses_weak(&e, &p)) {
            i += 1;
            continue;
        }
        match extend_basis(&basis, p) {
            Some(b) => {
                basis = b;
                e = Some(enclose_basis(&basis));
            }
            None => break,
        }
        i = 0;
        restarts += 1;
        if restarts > 16 * circles.len() + 64 {
            break;
        }
    }
    match e {
        Some(e) if e.x.is_finite() && e.y.is_finite() && e.r.is_finite() => e,
        _ => bounding_fallback(circles),
    }
}

fn bounding_fallback(circles: &[Circle]) -> Circle {
    let n = circles.len().max(1) as f64;
    let cx = circles.iter().map(|c| c.x).sum::<f64>() / n;
    let cy = circles.iter().map(|c| c.y).sum::<f64>() / n;
    let center = Circle::new(cx, cy, 0.0);
    let r = circles.iter().map(|c| center.dist(c) + c.r).fold(0.0, f64::max);
    Circle::new(cx, cy, r)
}

fn encloses_not(a: &Circle, b: &Circle) -> bool {
    let dr = a.r - b.r;
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    dr < 0.0 || dr * dr < dx * dx + dy * dy
}

fn encloses_weak(a: &Circle, b: &Circle) -> bool {
    let dr = a.r - b.r + a.r.max(b.r).max(1.0) * 1e-9;
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    dr > 0.0 && dr * dr > dx * dx + dy * dy
}

fn encloses_weak_all(a: &Circle, basis: &[Circle]) -> bool {
    basis.iter().all(|b| encloses_weak(a, b))
}

fn extend_basis(basis: &[Circle], p: Circle) -> Option<Vec<Circle>> {
    if encloses_weak_all(&p, basis) {
        return Some(vec![p]);
    }
    for bi in basis {
        if encloses_not(&p, bi) && encloses_weak_all(&enclose2(bi, &p), basis) {
            return Some(vec![*bi, p]);
        }
    }
    for i in 0..basis.len().saturating_sub(1) {
        for j in i + 1..basis.len() {
            let (bi, bj) = (&basis[i], &basis[j]);
            if encloses_not(&enclose2(bi, bj), &p)
                && encloses_not(&enclose2(bi, &p), bj)
                && encloses_not(&enclose2(bj, &p), bi)
                && encloses_weak_all(&enclose3(bi, bj, &p), basis)
            {
                return Some(vec![*bi, *bj, p]);
            }
        }
    }
    None
}

fn enclose_basis(basis: &[Circle]) -> Circle {
    match basis {
        [a] => *a,
        [a, b] => enclose2(a, b),
        [a, b, c] => enclose3(a, b, c),
        _ => unreachable!("basis has one to three circles"),
    }
}

fn enclose2(a: &Circle, b: &Circle) -> Circle {
    let (x21, y21, r21) = (b.x - a.x, b.y - a.y, b.r - a.r);
    let l = x21.hypot(y21);
    Circle::new(
        (a.x + b.x + x21 / l * r21) / 2.0,
        (a.y + b.y + y21 / l * r21) / 2.0,
        (l + a.r + b.r) / 2.0,
    )
}

fn enclose3(a: &Circle, b: &Circle, c: &Circle) -> Circle {
    let (x1, y1, r1) = (a.x, a.y, a.r);
    let (x2, y2, r2) = (b.x, b.y, b.r);
    let (x3, y3, r3) = (c.x, c.y, c.r);
    let a2 = x1 - x2;
    let a3 = x1 - x3;
    let b2 = y1 - y2;
    let b3 = y1 - y3;
    let c2 = r2 - r1;
    let c3 = r3 - r1;
    let d1 = x1 * x1 + y1 * y1 - r1 * r1;
    let d2 = d1 - x2 * x2 - y2 * y2 + r2 * r2;
    let d3 = d1 - x3 * x3 - y3 * y3 + r3 * r3;
    let ab = a3 * b2 - a2 * b3;
    let xa = (b2 * d3 - b3 * d2) / (ab * 2.0) - x1;
    let xb = (b3 * c2 - b2 * c3) / ab;
    let ya = (a3 * d2 - a2 * d3) / (ab * 2.0) - y1;
    let yb = (a2 * c3 - a3 * c2) / ab;
    let qa = xb * xb + yb * yb - 1.0;
    let qb = 2.0 * (r1 + xa * xb + ya * yb);
    let qc = xa * xa + ya * ya - r1 * r1;
    let r = -(if qa.abs() > 1e-6 { (qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa) } else { qc / qb });
    Circle::new(x1 + xa + xb * r, y1 + ya + yb * r, r)
}
