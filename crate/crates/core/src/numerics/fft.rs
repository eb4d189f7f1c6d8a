use std::f64::consts::PI;

use num_complex::Complex64;

use super::NumericsError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Iterative radix-2 transform. Forward uses the `e^(-2 pi i nk/N)` kernel;
/// inverse uses the conjugate kernel and divides by `N`.
pub fn fft(x: &[Complex64], dir: Direction) -> Result<Vec<Complex64>, NumericsError> {
    let n = x.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(NumericsError::NotPowerOfTwo(n));
    }
    let mut a = x.to_vec();
    let bits = n.trailing_zeros();
    if bits > 0 {
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if i < j {
                a.swap(i, j);
            }
        }
    }
    let sign = match dir {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = sign * 2.0 * PI / len as f64;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                // Twiddles are computed directly rather than by repeated
                // multiplication, which accumulates error on long inputs.
                let w = Complex64::from_polar(1.0, step * k as f64);
                let u = a[start + k];
                let v = a[start + k + half] * w;
                a[start + k] = u + v;
                a[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
    if dir == Direction::Inverse {
        let scale = 1.0 / n as f64;
        for z in &mut a {
            *z *= scale;
        }
    }
    Ok(a)
}

/// `out[k] = sum_i a[i] * b[k - i]` for `k` in `0..n+m-1`.
pub fn convolve_direct(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Convolution through the spectrum, zero-padding to a power of two.
pub fn convolve_fft(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let len = a.len() + b.len() - 1;
    let n = len.next_power_of_two();
    let pad = |v: &[f64]| {
        let mut z: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        z.resize(n, Complex64::new(0.0, 0.0));
        z
    };
    let fa = fft(&pad(a), Direction::Forward).expect("padded to a power of two");
    let fb = fft(&pad(b), Direction::Forward).expect("padded to a power of two");
    let prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let back = fft(&prod, Direction::Inverse).expect("padded to a power of two");
    back[..len].iter().map(|z| z.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn impulse_and_constant() {
        let flat = fft(&[c(1.0), c(0.0), c(0.0), c(0.0)], Direction::Forward).unwrap();
        assert!(close(&flat, &[c(1.0); 4], 1e-15));
        let dc = fft(&[c(1.0); 4], Direction::Forward).unwrap();
        assert!(close(&dc, &[c(4.0), c(0.0), c(0.0), c(0.0)], 1e-15));
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert_eq!(fft(&[c(1.0); 3], Direction::Forward), Err(NumericsError::NotPowerOfTwo(3)));
        assert_eq!(fft(&[], Direction::Forward), Err(NumericsError::NotPowerOfTwo(0)));
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64, (i * i) as f64 % 3.0)).collect();
        let fast = fft(&x, Direction::Forward).unwrap();
        let n = x.len();
        let slow: Vec<Complex64> = (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| x[j] * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64))
                    .sum()
            })
            .collect();
        assert!(close(&fast, &slow, 1e-12));
    }

    #[test]
    fn small_convolutions() {
        assert_eq!(convolve_direct(&[1.0, 2.0], &[3.0, 4.0]), vec![3.0, 10.0, 8.0]);
        assert_eq!(convolve_direct(&[1.0], &[5.0, 6.0]), vec![5.0, 6.0]);
        assert_eq!(convolve_fft(&[0.0, 0.0], &[0.0]), vec![0.0, 0.0]);
        let f = convolve_fft(&[1.0, 2.0], &[3.0, 4.0]);
        for (x, y) in f.iter().zip([3.0, 10.0, 8.0]) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    fn vec_strategy(max: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1000.0f64..1000.0, 1..=max)
    }

    proptest! {
        #[test]
        fn round_trip(re in prop::collection::vec(-1.0f64..1.0, 16), im in prop::collection::vec(-1.0f64..1.0, 16)) {
            let x: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
            let back = fft(&fft(&x, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
            let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
            prop_assert!(close(&x, &back, 1e-12 * scale));
        }

        #[test]
        fn parseval(re in prop::collection::vec(-1.0f64..1.0, 32)) {
            let x: Vec<Complex64> = re.iter().map(|&a| c(a)).collect();
            let spec = fft(&x, Direction::Forward).unwrap();
            let time: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            let freq: f64 = spec.iter().map(|z| z.norm_sqr()).sum::<f64>() / 32.0;
            prop_assert!((time - freq).abs() <= 1e-9 * time.max(1e-300));
        }

        #[test]
        fn commutative_and_linear(a in vec_strategy(20), b in vec_strategy(20), cc in vec_strategy(20)) {
            let ab = convolve_direct(&a, &b);
            let ba = convolve_direct(&b, &a);
            prop_assert_eq!(ab.len(), ba.len());
            for (x, y) in ab.iter().zip(&ba) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
            let n = b.len().max(cc.len());
            let mut b2 = b.clone();
            b2.resize(n, 0.0);
            let mut c2 = cc.clone();
            c2.resize(n, 0.0);
            let sum: Vec<f64> = b2.iter().zip(&c2).map(|(x, y)| x + y).collect();
            let lhs = convolve_direct(&a, &sum);
            let r1 = convolve_direct(&a, &b2);
            let r2 = convolve_direct(&a, &c2);
            for k in 0..lhs.len() {
                let rhs = r1[k] + r2[k];
                prop_assert!((lhs[k] - rhs).abs() <= 1e-9 * rhs.abs().max(1.0));
            }
        }
    }
}
