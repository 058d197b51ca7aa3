//! Midpoint circles and the pixel visit orders built from them.
//!
//! All ordering here is exact integer arithmetic — no trigonometry — so the
//! visit order is identical across platforms and thread counts.

use std::cmp::Ordering;

/// First-octant lattice points (x ≥ y ≥ 0) of the radius-`r` midpoint
/// circle, choosing at each step the x that minimizes |x² + y² − r²|.
fn octant(radius: u32) -> Vec<(i64, i64)> {
    let r2 = radius as i64 * radius as i64;
    let mut points = Vec::with_capacity(radius as usize + 2);
    let mut x = radius as i64;
    let mut y = 0i64;
    loop {
        points.push((x, y));
        y += 1;
        let keep = (x * x + y * y - r2).abs();
        let step = ((x - 1) * (x - 1) + y * y - r2).abs();
        // keep + step has odd parity, so a tie cannot occur.
        debug_assert_ne!(keep, step);
        if step < keep {
            x -= 1;
        }
        if y > x {
            return points;
        }
    }
}

/// Angle octant of an offset, counted counterclockwise from east:
/// 0 = east axis, 1 = first quadrant interior, 2 = north axis, ...
fn angle_class(d: (i64, i64)) -> u8 {
    let (x, y) = d;
    match (x.signum(), y.signum()) {
        (1, 0) | (0, 0) => 0,
        (1, 1) => 1,
        (0, 1) => 2,
        (-1, 1) => 3,
        (-1, 0) => 4,
        (-1, -1) => 5,
        (0, -1) => 6,
        (1, -1) => 7,
        _ => unreachable!(),
    }
}

/// Total order on offsets: counterclockwise angle from east, then squared
/// radius. Exact — within one angle class the cross product decides.
fn angle_then_radius(a: (i64, i64), b: (i64, i64)) -> Ordering {
    angle_class(a)
        .cmp(&angle_class(b))
        .then_with(|| (a.1 * b.0).cmp(&(a.0 * b.1)))
        .then_with(|| (a.0 * a.0 + a.1 * a.1).cmp(&(b.0 * b.0 + b.1 * b.1)))
        .then_with(|| a.cmp(&b))
}

/// Lattice points of the midpoint circle of `radius` around `center`,
/// deduplicated and sorted counterclockwise starting from east.
pub fn circle_points(radius: u32, center: (i32, i32)) -> Vec<(i32, i32)> {
    let mut offsets: Vec<(i64, i64)> = Vec::with_capacity(8 * radius as usize + 8);
    for &(x, y) in &octant(radius) {
        offsets.extend_from_slice(&[
            (x, y),
            (y, x),
            (-y, x),
            (-x, y),
            (-x, -y),
            (-y, -x),
            (y, -x),
            (x, -y),
        ]);
    }
    offsets.sort_unstable_by(|&a, &b| angle_then_radius(a, b));
    offsets.dedup();
    offsets
        .into_iter()
        .map(|(dx, dy)| (center.0 + dx as i32, center.1 + dy as i32))
        .collect()
}

/// Rings fill: circles of radius 0..=max_radius concatenated. Rings are
/// pairwise disjoint, so the order has no duplicate pixels.
pub fn rings_order(max_radius: u32, center: (i32, i32)) -> Vec<(i32, i32)> {
    let mut order = Vec::new();
    for r in 0..=max_radius {
        order.extend(circle_points(r, center));
    }
    order
}

/// Nearest integer to √s for s ≥ 0, by integer arithmetic only.
fn rounded_sqrt(s: i64) -> i64 {
    let k = (s as u64).isqrt() as i64;
    // round(√s) = k+1 exactly when s > k² + k, since (k + 1/2)² = k² + k + 1/4.
    if s > k * (k + 1) {
        k + 1
    } else {
        k
    }
}

/// Disk fill: every pixel within max_radius + 0.5 of the center, sorted by
/// rounded distance and then counterclockwise angle from east.
pub fn disk_order(max_radius: u32, center: (i32, i32)) -> Vec<(i32, i32)> {
    let r = max_radius as i64;
    // dx² + dy² ≤ (r + 1/2)² for integers ⇔ dx² + dy² ≤ r² + r.
    let limit = r * r + r;
    let mut offsets: Vec<(i64, i64, i64)> = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            let s = dx * dx + dy * dy;
            if s <= limit {
                offsets.push((rounded_sqrt(s), dx, dy));
            }
        }
    }
    offsets.sort_unstable_by(|&(ka, xa, ya), &(kb, xb, yb)| {
        ka.cmp(&kb).then_with(|| angle_then_radius((xa, ya), (xb, yb)))
    });
    offsets
        .into_iter()
        .map(|(_, dx, dy)| (center.0 + dx as i32, center.1 + dy as i32))
        .collect()
}
