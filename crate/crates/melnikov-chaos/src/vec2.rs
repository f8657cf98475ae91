//! Small helpers for plane vectors stored as `[f64; 2]`.

pub type V2 = [f64; 2];
pub type M2 = [[f64; 2]; 2];

#[inline]
pub fn add(a: V2, b: V2) -> V2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: V2, b: V2) -> V2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(k: f64, a: V2) -> V2 {
    [k * a[0], k * a[1]]
}

#[inline]
pub fn dot(a: V2, b: V2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: V2) -> f64 {
    a[0].hypot(a[1])
}

/// `a ∧ b = a₁b₂ − a₂b₁`.
#[inline]
pub fn wedge(a: V2, b: V2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn dist(a: V2, b: V2) -> f64 {
    norm(sub(a, b))
}

pub fn normalize(a: V2) -> V2 {
    let n = norm(a);
    [a[0] / n, a[1] / n]
}

/// Counter-clockwise rotation by a quarter turn.
#[inline]
pub fn perp(a: V2) -> V2 {
    [-a[1], a[0]]
}

#[inline]
pub fn mat_vec(m: &M2, v: V2) -> V2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// Distance from `p` to the segment `[a, b]`.
pub fn dist_to_segment(p: V2, a: V2, b: V2) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return dist(p, a);
    }
    let s = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    dist(p, add(a, scale(s, ab)))
}
