//! Image comparison: absolute differences, SSIM and PSNR.

use crate::error::{Error, Result};
use crate::frame::GrayFrame;

pub const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const DYNAMIC_RANGE: f64 = 255.0;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

/// Per-pixel `|a - b|`, stamped with `b`'s time.
pub fn frame_abs_diff(a: &GrayFrame, b: &GrayFrame) -> Result<GrayFrame> {
    a.same_geometry(b)?;
    let pixels = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(x, y)| (x - y).abs())
        .collect();
    Ok(GrayFrame::from_raw(a.width(), a.height(), pixels, b.t))
}

/// Normalized 11-tap Gaussian with sigma 1.5.
pub fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Valid-region separable filtering: output is `(w-10) x (h-10)`.
fn filter_valid(src: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let mut horiz = vec![0.0; ow * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            let mut acc = 0.0;
            for (i, kv) in k.iter().enumerate() {
                acc += kv * row[x + i];
            }
            horiz[y * ow + x] = acc;
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for (i, kv) in k.iter().enumerate() {
            let src_row = &horiz[(y + i) * ow..(y + i + 1) * ow];
            let dst = &mut out[y * ow..(y + 1) * ow];
            for (d, s) in dst.iter_mut().zip(src_row) {
                *d += kv * s;
            }
        }
    }
    out
}

/// Mean SSIM over every position where the 11x11 Gaussian window
/// (sigma 1.5) fits inside the frame, with L = 255, K1 = 0.01, K2 = 0.03.
pub fn ssim(a: &GrayFrame, b: &GrayFrame) -> Result<f64> {
    a.same_geometry(b)?;
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::invalid(format!(
            "SSIM needs frames of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {w}x{h}"
        )));
    }
    let k = gaussian_kernel();
    let (pa, pb) = (a.pixels(), b.pixels());
    let aa: Vec<f64> = pa.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = pb.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = pa.iter().zip(pb).map(|(x, y)| x * y).collect();
    let mu_a = filter_valid(pa, w, h, &k);
    let mu_b = filter_valid(pb, w, h, &k);
    let e_aa = filter_valid(&aa, w, h, &k);
    let e_bb = filter_valid(&bb, w, h, &k);
    let e_ab = filter_valid(&ab, w, h, &k);

    let c1 = (K1 * DYNAMIC_RANGE).powi(2);
    let c2 = (K2 * DYNAMIC_RANGE).powi(2);
    let mut sum = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let var_a = e_aa[i] - ma * ma;
        let var_b = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
        let den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
        sum += num / den;
    }
    Ok(sum / mu_a.len() as f64)
}

/// Peak signal-to-noise ratio in dB; identical frames give `f64::INFINITY`.
pub fn psnr(a: &GrayFrame, b: &GrayFrame) -> Result<f64> {
    a.same_geometry(b)?;
    let mse = mse(a.pixels(), b.pixels());
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (DYNAMIC_RANGE * DYNAMIC_RANGE / mse).log10()
    })
}

pub(crate) fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Mean absolute difference.
pub fn mad(a: &GrayFrame, b: &GrayFrame) -> Result<f64> {
    a.same_geometry(b)?;
    Ok(a.pixels()
        .iter()
        .zip(b.pixels())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / a.pixels().len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frame(rng: &mut impl Rng, w: usize, h: usize) -> GrayFrame {
        GrayFrame::new(w, h, (0..w * h).map(|_| rng.random_range(0.0..255.0)).collect(), 0)
            .unwrap()
    }

    /// Direct definition: weighted moments summed over each full window.
    #[allow(clippy::needless_range_loop)]
    fn ssim_oracle(a: &GrayFrame, b: &GrayFrame) -> f64 {
        let n = 11usize;
        let mut g = [[0.0f64; 11]; 11];
        let mut total = 0.0;
        for (i, row) in g.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
                *v = (-(di * di + dj * dj) / (2.0 * 1.5 * 1.5)).exp();
                total += *v;
            }
        }
        let (c1, c2) = ((0.01f64 * 255.0).powi(2), (0.03f64 * 255.0).powi(2));
        let (w, h) = (a.width(), a.height());
        let mut sum = 0.0;
        let mut count = 0;
        for oy in 0..=h - n {
            for ox in 0..=w - n {
                let (mut ma, mut mb) = (0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let wgt = g[i][j] / total;
                        ma += wgt * a.get(ox + j, oy + i);
                        mb += wgt * b.get(ox + j, oy + i);
                    }
                }
                let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let wgt = g[i][j] / total;
                        let da = a.get(ox + j, oy + i) - ma;
                        let db = b.get(ox + j, oy + i) - mb;
                        va += wgt * da * da;
                        vb += wgt * db * db;
                        cov += wgt * da * db;
                    }
                }
                sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                    / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                count += 1;
            }
        }
        sum / count as f64
    }

    #[test]
    fn ssim_matches_direct_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let a = random_frame(&mut rng, 32, 32);
            let b = random_frame(&mut rng, 32, 32);
            let fast = ssim(&a, &b).unwrap();
            assert!((fast - ssim_oracle(&a, &b)).abs() < 1e-9);
            assert_eq!(fast, ssim(&b, &a).unwrap());
            assert!((-1.0..=1.0).contains(&fast));
        }
    }

    #[test]
    fn ssim_identity_and_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_frame(&mut rng, 20, 13);
        assert_eq!(ssim(&a, &a).unwrap(), 1.0);
        assert_eq!(ssim(&GrayFrame::filled(11, 11, 0.0, 0), &GrayFrame::filled(11, 11, 0.0, 0)).unwrap(), 1.0);
        assert!(ssim(&GrayFrame::filled(10, 12, 0.0, 0), &GrayFrame::filled(10, 12, 0.0, 0)).is_err());
        assert!(ssim(&a, &GrayFrame::filled(20, 14, 0.0, 0)).is_err());
    }

    #[test]
    fn psnr_cases() {
        let a = GrayFrame::filled(4, 4, 100.0, 0);
        let b = GrayFrame::filled(4, 4, 101.0, 0);
        let c = GrayFrame::filled(4, 4, 100.5, 0);
        let p = psnr(&a, &b).unwrap();
        assert!((p - 10.0 * (255.0f64 * 255.0).log10()).abs() < 1e-12);
        assert!((p - 48.1308).abs() < 1e-3);
        assert!((psnr(&a, &c).unwrap() - p - 6.0206).abs() < 1e-3);
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn abs_diff_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_frame(&mut rng, 6, 5);
        let mut b = random_frame(&mut rng, 6, 5);
        b.t = 9;
        assert!(frame_abs_diff(&a, &a).unwrap().pixels().iter().all(|&v| v == 0.0));
        assert_eq!(
            frame_abs_diff(&a, &b).unwrap().pixels(),
            frame_abs_diff(&b, &a).unwrap().pixels()
        );
        assert_eq!(frame_abs_diff(&a, &b).unwrap().t, 9);
        let shifted = GrayFrame::new(6, 5, a.pixels().iter().map(|v| v + 7.0).collect(), 0).unwrap();
        assert!(frame_abs_diff(&a, &shifted)
            .unwrap()
            .pixels()
            .iter()
            .all(|&v| (v - 7.0).abs() < 1e-12));
    }
}
