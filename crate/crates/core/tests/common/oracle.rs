//! Independent reference integrators used only by tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;

/// Flat parallelogram `origin + s a + t b`, `(s, t)` in the unit square.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub origin: Vector3<f64>,
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
}

impl Rect {
    pub fn new(origin: [f64; 3], a: [f64; 3], b: [f64; 3]) -> Self {
        Self {
            origin: Vector3::from(origin),
            a: Vector3::from(a),
            b: Vector3::from(b),
        }
    }

    /// Rectangle in the `z = 0` plane.
    pub fn xy(origin: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Self {
        Self::new([origin[0], origin[1], 0.0], [a[0], a[1], 0.0], [b[0], b[1], 0.0])
    }

    pub fn point(&self, s: f64, t: f64) -> Vector3<f64> {
        self.origin + self.a * s + self.b * t
    }

    pub fn area(&self) -> f64 {
        self.a.cross(&self.b).norm()
    }
}

/// Tanh-sinh nodes and weights on `[0, 1]`. Endpoint singularities of
/// logarithmic type are integrated to near machine precision.
pub fn tanh_sinh(step: f64, tmax: f64) -> Vec<(f64, f64)> {
    let k = (tmax / step).ceil() as i64;
    (-k..=k)
        .map(|i| {
            let t = i as f64 * step;
            let a = std::f64::consts::FRAC_PI_2 * t.sinh();
            let x = 1.0 / (1.0 + (-2.0 * a).exp());
            let w = step * std::f64::consts::FRAC_PI_2 * t.cosh() / (2.0 * a.cosh().powi(2));
            (x, w)
        })
        .collect()
}

/// Antiderivative of `1 / sqrt(u^2 + v^2 + h^2)` in `u` and `v`.
fn rect_primitive(u: f64, v: f64, h: f64) -> f64 {
    let r = (u * u + v * v + h * h).sqrt();
    let mut f = 0.0;
    if u != 0.0 {
        f += u * (v / (u * u + h * h).sqrt()).asinh();
    }
    if v != 0.0 {
        f += v * (u / (v * v + h * h).sqrt()).asinh();
    }
    if h != 0.0 && r != 0.0 {
        f -= h * (u * v / (h * r)).atan();
    }
    f
}

/// `int_Y 1 / |x - y| dy` over a rectangle in closed form.
pub fn inverse_distance_over_rect(x: &Vector3<f64>, y: &Rect) -> f64 {
    let (la, lb) = (y.a.norm(), y.b.norm());
    let (ea, eb) = (y.a / la, y.b / lb);
    let d = x - y.origin;
    let (u0, v0, h) = (d.dot(&ea), d.dot(&eb), d.dot(&ea.cross(&eb)));
    rect_primitive(la - u0, lb - v0, h) - rect_primitive(-u0, lb - v0, h)
        - rect_primitive(la - u0, -v0, h)
        + rect_primitive(-u0, -v0, h)
}

/// `int_X int_Y 1 / (4 pi |x - y|)` for flat rectangles: closed-form inner
/// integral, tanh-sinh outer integral.
pub fn laplace_flat_pair(x: &Rect, y: &Rect) -> f64 {
    let rule = tanh_sinh(1.0 / 32.0, 3.2);
    let mut total = 0.0;
    for &(s, ws) in &rule {
        for &(t, wt) in &rule {
            total += ws * wt * inverse_distance_over_rect(&x.point(s, t), y);
        }
    }
    total * x.area() / (4.0 * std::f64::consts::PI)
}

/// Adaptive Gauss–Kronrod (7, 15) on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive<T>(f: &mut dyn FnMut(f64) -> T, a: f64, b: f64, tol: f64) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + Norm,
{
    const XK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_8,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];
    fn rec<T>(f: &mut dyn FnMut(f64) -> T, a: f64, b: f64, tol: f64, depth: u32) -> T
    where
        T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + Norm,
    {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut kron = fc * WK[7];
        let mut gauss = fc * WG[3];
        for i in 0..7 {
            let dx = h * XK[i];
            let s = f(c - dx) + f(c + dx);
            kron = kron + s * WK[i];
            if i % 2 == 1 {
                gauss = gauss + s * WG[i / 2];
            }
        }
        let (kron, gauss) = (kron * h, gauss * h);
        if depth == 0 || (kron - gauss).norm() <= tol {
            kron
        } else {
            rec(f, a, c, 0.5 * tol, depth - 1) + rec(f, c, b, 0.5 * tol, depth - 1)
        }
    }
    rec(f, a, b, tol, 30)
}

pub trait Norm {
    fn norm(&self) -> f64;
}

impl Norm for f64 {
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl Norm for num_complex::Complex64 {
    fn norm(&self) -> f64 {
        num_complex::Complex64::norm(*self)
    }
}

/// Four nested adaptive integrations over the unit hypercube.
pub fn adaptive_4d<T>(f: &dyn Fn([f64; 4]) -> T, tol: f64) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + Norm,
{
    adaptive(
        &mut |a| {
            adaptive(
                &mut |b| {
                    adaptive(
                        &mut |c| adaptive(&mut |d| f([a, b, c, d]), 0.0, 1.0, tol),
                        0.0,
                        1.0,
                        tol,
                    )
                },
                0.0,
                1.0,
                tol,
            )
        },
        0.0,
        1.0,
        tol,
    )
}

/// Adaptive Gauss–Kronrod (7, 15) for vector-valued integrands, accumulated
/// into `out`. `f(x, values)` overwrites `values`.
pub fn adaptive_vec(
    f: &mut dyn FnMut(f64, &mut [Complex64]),
    a: f64,
    b: f64,
    tol: f64,
    out: &mut [Complex64],
) {
    const XK: [f64; 7] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
    ];
    const WK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_8,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];
    let n = out.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut value = vec![zero; n];
    let mut kron = vec![zero; n];
    let mut gauss = vec![zero; n];
    // explicit stack of (a, b, tol, depth)
    let mut stack = vec![(a, b, tol, 0u32)];
    while let Some((a, b, tol, depth)) = stack.pop() {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        f(c, &mut value);
        for k in 0..n {
            kron[k] = value[k] * WK[7];
            gauss[k] = value[k] * WG[3];
        }
        for i in 0..7 {
            for x in [c - h * XK[i], c + h * XK[i]] {
                f(x, &mut value);
                for k in 0..n {
                    kron[k] += value[k] * WK[i];
                    if i % 2 == 1 {
                        gauss[k] += value[k] * WG[i / 2];
                    }
                }
            }
        }
        let err = kron.iter().zip(&gauss).map(|(k, g)| (k - g).norm()).fold(0.0, f64::max) * h;
        if err <= tol || depth >= 60 || h < 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            for k in 0..n {
                out[k] += kron[k] * h;
            }
        } else {
            let t = tol * std::f64::consts::FRAC_1_SQRT_2;
            stack.push((a, c, t, depth + 1));
            stack.push((c, b, t, depth + 1));
        }
    }
}

/// Reference-square vector field `[v0, v1]` and its divergence, for every local
/// basis function at `(s, t)`.
pub type LocalBasis<'a> = &'a dyn Fn(f64, f64) -> Vec<([f64; 2], f64)>;

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// `int_Y G(x, y) [dF b_k, div b_k] dy` in reference coordinates of the
/// rectangle `y`, for every basis function `k`, packed as four complex numbers
/// per function. The rectangle is split into four signed triangles with apex
/// at the foot of `x` on its plane; each is integrated in polar form, where the
/// `1/r` factor is cancelled by the radial Jacobian.
pub fn helmholtz_potentials(kappa: f64, x: &Vector3<f64>, y: &Rect, basis: LocalBasis, n: usize, tol: f64) -> Vec<Complex64> {
    let (la, lb) = (y.a.norm(), y.b.norm());
    assert!(y.a.dot(&y.b).abs() <= 1e-14 * la * lb, "oracle needs a rectangle");
    let (ea, eb) = (y.a / la, y.b / lb);
    let d = x - y.origin;
    let foot = [d.dot(&ea), d.dot(&eb)];
    let h = d.dot(&ea.cross(&eb));
    let corners = [[0.0, 0.0], [la, 0.0], [la, lb], [0.0, lb]];
    let mut out = vec![Complex64::new(0.0, 0.0); 4 * n];
    for i in 0..4 {
        let (c0, c1) = (corners[i], corners[(i + 1) % 4]);
        let r0 = [c0[0] - foot[0], c0[1] - foot[1]];
        let edge = [c1[0] - c0[0], c1[1] - c0[1]];
        let twice_area = cross2(r0, edge);
        if twice_area.abs() <= 1e-15 * la * lb {
            continue;
        }
        let mut along = |lambda: f64, acc: &mut [Complex64]| {
            acc.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            let ray = [r0[0] + lambda * edge[0], r0[1] + lambda * edge[1]];
            let len = (ray[0] * ray[0] + ray[1] * ray[1]).sqrt();
            let mut radial = |rho: f64, vals: &mut [Complex64]| {
                let (u, v) = (foot[0] + rho * ray[0], foot[1] + rho * ray[1]);
                let r = (rho * rho * len * len + h * h).sqrt();
                let g = Complex64::from_polar(1.0, kappa * r) / (4.0 * std::f64::consts::PI * r) * (rho * twice_area);
                for (k, (val, div)) in basis(u / la, v / lb).into_iter().enumerate() {
                    let phys = y.a * val[0] + y.b * val[1];
                    for c in 0..3 {
                        vals[4 * k + c] = g * phys[c];
                    }
                    vals[4 * k + 3] = g * div;
                }
            };
            adaptive_vec(&mut radial, 0.0, 1.0, tol, acc);
        };
        adaptive_vec(&mut along, 0.0, 1.0, tol, &mut out);
    }
    // du dv = la lb ds dt
    out.iter_mut().for_each(|v| *v /= la * lb);
    out
}

/// Element-pair block `-kappa int int G (dF b_i).(dF b_j) + 1/kappa int int G
/// div b_i div b_j` on two flat rectangles, in reference coordinates: rows
/// are basis functions on `x`, columns on `y`. Outer integral by tensor
/// tanh-sinh, inner by [`helmholtz_potentials`].
pub fn helmholtz_flat_pair(kappa: f64, x: &Rect, y: &Rect, basis: LocalBasis, n: usize, step: f64, tol: f64) -> DMatrix<Complex64> {
    let rule = tanh_sinh(step, 3.0);
    let mut block = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for &(s, ws) in &rule {
        for &(t, wt) in &rule {
            let pot = helmholtz_potentials(kappa, &x.point(s, t), y, basis, n, tol);
            let w = ws * wt;
            for (i, (val, div)) in basis(s, t).into_iter().enumerate() {
                let phys = x.a * val[0] + x.b * val[1];
                for j in 0..n {
                    let dot = pot[4 * j] * phys[0] + pot[4 * j + 1] * phys[1] + pot[4 * j + 2] * phys[2];
                    block[(i, j)] += (dot * (-kappa) + pot[4 * j + 3] * (div / kappa)) * w;
                }
            }
        }
    }
    block
}

#[cfg(test)]
mod tests {
    #[allow(unused_imports)]
    use super::*;

    #[test]
    fn closed_form_inner_integral_matches_gauss_when_separated() {
        let y = Rect::new([0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.5, 0.0]);
        let x = Vector3::new(0.7, 1.9, 0.8);
        let reference = adaptive(
            &mut |s| adaptive(&mut |t| 1.0 / (x - y.point(s, t)).norm(), 0.0, 1.0, 1e-14),
            0.0,
            1.0,
            1e-14,
        ) * y.area();
        assert!((inverse_distance_over_rect(&x, &y) - reference).abs() < 1e-12);
    }

    #[test]
    fn static_potential_of_constant_field_matches_closed_form() {
        let y = Rect::new([0.0, 0.0, 0.0], [1.5, 0.0, 0.0], [0.0, 0.0, 0.5]);
        let basis = |_: f64, _: f64| vec![([1.0, 0.0], 2.0)];
        for x in [Vector3::new(0.3, 0.2, 0.1), Vector3::new(2.0, -1.0, 0.4), Vector3::new(0.7, 0.0, 0.25)] {
            let pot = helmholtz_potentials(0.0, &x, &y, &basis, 1, 1e-14);
            let expect = inverse_distance_over_rect(&x, &y) / (4.0 * std::f64::consts::PI * y.area());
            assert!((pot[0].re - 1.5 * expect).abs() < 1e-12, "{} vs {}", pot[0].re, 1.5 * expect);
            assert!((pot[3].re - 2.0 * expect).abs() < 1e-12);
            assert!(pot[1].norm() + pot[2].norm() < 1e-15);
        }
    }
}
