//! Small fixed-size vector helpers. Points are always stored as `[f64; 3]`;
//! 2D data keeps the third coordinate at zero.

pub type Point = [f64; 3];

pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: &Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: &Point) -> Point {
    scale(a, 1.0 / norm(a))
}

/// Barycenter of a set of points.
pub fn centroid(pts: &[Point]) -> Point {
    let mut c = [0.0; 3];
    for p in pts {
        c = add(&c, p);
    }
    scale(&c, 1.0 / pts.len() as f64)
}

/// Signed volume of a simplex (area in 2D).
pub fn signed_volume(dim: usize, pts: &[Point]) -> f64 {
    match dim {
        2 => {
            let a = sub(&pts[1], &pts[0]);
            let b = sub(&pts[2], &pts[0]);
            0.5 * (a[0] * b[1] - a[1] * b[0])
        }
        3 => {
            let a = sub(&pts[1], &pts[0]);
            let b = sub(&pts[2], &pts[0]);
            let c = sub(&pts[3], &pts[0]);
            dot(&a, &cross(&b, &c)) / 6.0
        }
        _ => panic!("dimension {dim} unsupported"),
    }
}

/// Gradients of the barycentric coordinates of a simplex, one per vertex.
pub fn bary_gradients(dim: usize, pts: &[Point]) -> Vec<Point> {
    // Rows of the inverse Jacobian give grad λ_1..λ_d; grad λ_0 = -sum.
    let mut jac = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    for j in 0..dim {
        let e = sub(&pts[j + 1], &pts[0]);
        for i in 0..dim {
            jac[(i, j)] = e[i];
        }
    }
    let inv = jac.try_inverse().expect("degenerate simplex");
    let mut g = vec![[0.0; 3]; dim + 1];
    for l in 0..dim {
        for i in 0..dim {
            g[l + 1][i] = inv[(l, i)];
            g[0][i] -= inv[(l, i)];
        }
    }
    g
}

/// Barycentric coordinates of `x` with respect to a simplex.
pub fn barycentric(dim: usize, pts: &[Point], x: &Point) -> Vec<f64> {
    let g = bary_gradients(dim, pts);
    let d = sub(x, &pts[0]);
    let mut lam = vec![0.0; dim + 1];
    let mut s = 0.0;
    for l in 1..=dim {
        lam[l] = dot(&g[l], &d);
        s += lam[l];
    }
    lam[0] = 1.0 - s;
    lam
}

/// Point with given barycentric coordinates.
pub fn from_barycentric(pts: &[Point], lam: &[f64]) -> Point {
    let mut x = [0.0; 3];
    for (p, l) in pts.iter().zip(lam) {
        x = add(&x, &scale(p, *l));
    }
    x
}

/// Unit normal of a facet (edge in 2D, triangle in 3D), unoriented.
pub fn facet_normal(dim: usize, pts: &[Point]) -> Point {
    match dim {
        2 => {
            let t = sub(&pts[1], &pts[0]);
            normalize(&[t[1], -t[0], 0.0])
        }
        3 => normalize(&cross(&sub(&pts[1], &pts[0]), &sub(&pts[2], &pts[0]))),
        _ => panic!("dimension {dim} unsupported"),
    }
}

/// Facet measure (edge length or triangle area).
pub fn facet_measure(dim: usize, pts: &[Point]) -> f64 {
    match dim {
        2 => norm(&sub(&pts[1], &pts[0])),
        3 => 0.5 * norm(&cross(&sub(&pts[1], &pts[0]), &sub(&pts[2], &pts[0]))),
        _ => panic!("dimension {dim} unsupported"),
    }
}

/// Orthonormal basis of the plane orthogonal to a unit vector `t`.
pub fn normal_plane(t: &Point) -> [Point; 2] {
    let a = if t[0].abs() < 0.6 {
        [1.0, 0.0, 0.0]
    } else if t[1].abs() < 0.6 {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let n1 = normalize(&cross(t, &a));
    let n2 = cross(t, &n1);
    [n1, n2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_volumes() {
        let tri = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!((signed_volume(2, &tri) - 0.5).abs() < 1e-15);
        let tet = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        assert!((signed_volume(3, &tet) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn barycentric_round_trip() {
        let tet = [
            [0.1, 0.2, 0.0],
            [1.3, 0.1, 0.2],
            [0.2, 1.1, 0.3],
            [0.3, 0.2, 0.9],
        ];
        let x = [0.4, 0.35, 0.3];
        let lam = barycentric(3, &tet, &x);
        let y = from_barycentric(&tet, &lam);
        assert!(norm(&sub(&x, &y)) < 1e-14);
        let g = bary_gradients(3, &tet);
        for (i, gi) in g.iter().enumerate() {
            for (j, p) in tet.iter().enumerate() {
                let d = dot(gi, &sub(p, &tet[0]));
                let expect = if i == j { 1.0 } else { 0.0 } - if i == 0 { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn normal_plane_is_orthonormal() {
        let t = normalize(&[0.3, -0.8, 0.5]);
        let [a, b] = normal_plane(&t);
        assert!(dot(&a, &t).abs() < 1e-15 && dot(&b, &t).abs() < 1e-15);
        assert!(dot(&a, &b).abs() < 1e-15);
        assert!((norm(&a) - 1.0).abs() < 1e-15 && (norm(&b) - 1.0).abs() < 1e-15);
    }
}
