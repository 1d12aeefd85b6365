//! Scalar functions (through `libm`) and small fixed-size vector and matrix helpers.

pub use core::f64::consts::PI;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn tan(x: f64) -> f64 {
    libm::tan(x)
}
#[inline]
pub fn atan(x: f64) -> f64 {
    libm::atan(x)
}
#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}
#[inline]
pub fn acos(x: f64) -> f64 {
    libm::acos(x)
}
#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Reduce an angle to `[0, 2pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let w = theta - two_pi * floor(theta / two_pi);
    if w >= two_pi {
        0.0
    } else {
        w
    }
}

pub type Vector<const N: usize> = [f64; N];
pub type Matrix<const N: usize> = [[f64; N]; N];

#[inline]
pub fn dot<const N: usize>(a: &Vector<N>, b: &Vector<N>) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm<const N: usize>(a: &Vector<N>) -> f64 {
    sqrt(dot(a, a))
}

#[inline]
pub fn add<const N: usize>(a: &Vector<N>, b: &Vector<N>) -> Vector<N> {
    core::array::from_fn(|i| a[i] + b[i])
}

#[inline]
pub fn sub<const N: usize>(a: &Vector<N>, b: &Vector<N>) -> Vector<N> {
    core::array::from_fn(|i| a[i] - b[i])
}

#[inline]
pub fn scale<const N: usize>(a: &Vector<N>, k: f64) -> Vector<N> {
    core::array::from_fn(|i| k * a[i])
}

/// `a + k b`
#[inline]
pub fn axpy<const N: usize>(a: &Vector<N>, k: f64, b: &Vector<N>) -> Vector<N> {
    core::array::from_fn(|i| a[i] + k * b[i])
}

pub fn max_abs_diff<const N: usize>(a: &Vector<N>, b: &Vector<N>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn zeros<const N: usize>() -> Matrix<N> {
    [[0.0; N]; N]
}

pub fn identity<const N: usize>() -> Matrix<N> {
    core::array::from_fn(|i| core::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }))
}

pub fn mat_vec<const N: usize>(m: &Matrix<N>, v: &Vector<N>) -> Vector<N> {
    core::array::from_fn(|i| dot(&m[i], v))
}

pub fn mat_mul<const N: usize>(a: &Matrix<N>, b: &Matrix<N>) -> Matrix<N> {
    core::array::from_fn(|i| core::array::from_fn(|j| (0..N).map(|k| a[i][k] * b[k][j]).sum()))
}

pub fn transpose<const N: usize>(a: &Matrix<N>) -> Matrix<N> {
    core::array::from_fn(|i| core::array::from_fn(|j| a[j][i]))
}

pub fn mat_add<const N: usize>(a: &Matrix<N>, b: &Matrix<N>) -> Matrix<N> {
    core::array::from_fn(|i| core::array::from_fn(|j| a[i][j] + b[i][j]))
}

pub fn mat_scale<const N: usize>(a: &Matrix<N>, k: f64) -> Matrix<N> {
    core::array::from_fn(|i| core::array::from_fn(|j| k * a[i][j]))
}

pub fn mat_max_abs_diff<const N: usize>(a: &Matrix<N>, b: &Matrix<N>) -> f64 {
    let mut m = 0.0f64;
    for i in 0..N {
        for j in 0..N {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

/// Generalized cross product `a ∧ b`, the skew matrix with `(a ∧ b) w = (a·w) b - (b·w) a`.
pub fn wedge<const N: usize>(a: &Vector<N>, b: &Vector<N>) -> Matrix<N> {
    core::array::from_fn(|i| core::array::from_fn(|j| b[i] * a[j] - a[i] * b[j]))
}

/// Orthogonal projection onto the hyperplane perpendicular to the unit vector `n`.
pub fn perp_projector<const N: usize>(n: &Vector<N>) -> Matrix<N> {
    core::array::from_fn(|i| core::array::from_fn(|j| if i == j { 1.0 } else { 0.0 } - n[i] * n[j]))
}

/// `½ Tr(A Bᵀ)`, the inner product on skew matrices used by the kinetic metric.
pub fn skew_inner<const N: usize>(a: &Matrix<N>, b: &Matrix<N>) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        for j in 0..N {
            acc += a[i][j] * b[i][j];
        }
    }
    0.5 * acc
}

/// Upper-triangle entries `S[i][j]`, `i < j`, in row-major order.
pub fn upper_triangle<const N: usize>(s: &Matrix<N>) -> alloc::vec::Vec<f64> {
    let mut out = alloc::vec::Vec::with_capacity(N * (N - 1) / 2);
    for i in 0..N {
        for j in i + 1..N {
            out.push(s[i][j]);
        }
    }
    out
}

/// Skew matrix from its upper triangle (inverse of [`upper_triangle`]).
pub fn skew_from_upper<const N: usize>(upper: &[f64]) -> Matrix<N> {
    let mut s = zeros::<N>();
    let mut k = 0;
    for i in 0..N {
        for j in i + 1..N {
            s[i][j] = upper[k];
            s[j][i] = -upper[k];
            k += 1;
        }
    }
    s
}

/// Counterclockwise quarter turn in the plane.
#[inline]
pub fn rot90(v: &Vector<2>) -> Vector<2> {
    [-v[1], v[0]]
}

#[inline]
pub fn cross(a: &Vector<3>, b: &Vector<3>) -> Vector<3> {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Skew matrix `[w]×` with `[w]× x = w × x`.
pub fn hat(w: &Vector<3>) -> Matrix<3> {
    [[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]]
}

/// Axial vector of a 3×3 skew matrix.
pub fn vee(s: &Matrix<3>) -> Vector<3> {
    [s[2][1], s[0][2], s[1][0]]
}
