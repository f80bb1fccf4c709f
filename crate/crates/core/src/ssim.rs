//! Luma structural similarity between raw YUV 4:2:0 sequences.
//!
//! Every 8x8 window (stride 1) contributes
//!
//! ```text
//! (2 mu_x mu_y + C1)(2 cov_xy + C2) / ((mu_x^2 + mu_y^2 + C1)(var_x + var_y + C2))
//! ```
//!
//! with uniform weights and population (1/N) moments; the frame score is the
//! mean over windows. Window sums come from integer summed-area tables, so
//! every moment is exact before the final division.

use std::io::Read;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const WINDOW: usize = 8;
pub const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
pub const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

/// An 8-bit luma plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    luma: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, luma: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter("frame dimensions must be positive".into()));
        }
        if luma.len() != width * height {
            return Err(Error::Parameter(format!(
                "luma plane has {} bytes, expected {width}x{height}",
                luma.len()
            )));
        }
        Ok(Frame {
            width,
            height,
            luma,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Frame::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn luma(&self) -> &[u8] {
        &self.luma
    }
}

/// Reads frame-sequential planar 4:2:0 video, keeping only the luma planes.
pub fn read_yuv420p<R: Read>(mut stream: R, width: usize, height: usize) -> Result<Vec<Frame>> {
    if width == 0 || height == 0 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "4:2:0 dimensions must be positive and even, got {width}x{height}"
        )));
    }
    let luma_size = width * height;
    let frame_size = luma_size * 3 / 2;
    let mut frames = Vec::new();
    let mut buf = vec![0u8; frame_size];
    let mut offset = 0u64;
    loop {
        let got = read_full(&mut stream, &mut buf)?;
        if got == 0 {
            return Ok(frames);
        }
        if got < frame_size {
            return Err(Error::TruncatedFrame {
                offset,
                available: got,
                frame_size,
            });
        }
        frames.push(Frame::new(width, height, buf[..luma_size].to_vec())?);
        offset += frame_size as u64;
    }
}

fn read_full<R: Read>(stream: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match stream.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(k) => filled += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}

/// Inclusive-prefix sums with a zero border: `(width + 1) x (height + 1)`.
struct SummedArea {
    stride: usize,
    data: Vec<i64>,
}

impl SummedArea {
    fn build(width: usize, height: usize, value: impl Fn(usize) -> i64) -> Self {
        let stride = width + 1;
        let mut data = vec![0i64; stride * (height + 1)];
        for y in 0..height {
            let mut row = 0i64;
            for x in 0..width {
                row += value(y * width + x);
                data[(y + 1) * stride + x + 1] = data[y * stride + x + 1] + row;
            }
        }
        SummedArea { stride, data }
    }

    fn window(&self, x: usize, y: usize) -> i64 {
        let s = self.stride;
        let (x1, y1) = (x + WINDOW, y + WINDOW);
        self.data[y1 * s + x1] - self.data[y * s + x1] - self.data[y1 * s + x] + self.data[y * s + x]
    }
}

/// Mean SSIM over all 8x8 windows of two equally sized frames.
pub fn ssim_frame(reference: &Frame, distorted: &Frame) -> Result<f64> {
    if reference.width != distorted.width || reference.height != distorted.height {
        return Err(Error::Parameter(format!(
            "frame dimensions differ: {}x{} vs {}x{}",
            reference.width, reference.height, distorted.width, distorted.height
        )));
    }
    let (w, h) = (reference.width, reference.height);
    if w < WINDOW || h < WINDOW {
        return Err(Error::Parameter(format!(
            "frame {w}x{h} is smaller than the {WINDOW}x{WINDOW} window"
        )));
    }
    let a = &reference.luma;
    let b = &distorted.luma;
    let sa = SummedArea::build(w, h, |i| a[i] as i64);
    let sb = SummedArea::build(w, h, |i| b[i] as i64);
    let saa = SummedArea::build(w, h, |i| (a[i] as i64) * (a[i] as i64));
    let sbb = SummedArea::build(w, h, |i| (b[i] as i64) * (b[i] as i64));
    let sab = SummedArea::build(w, h, |i| (a[i] as i64) * (b[i] as i64));

    let count = (WINDOW * WINDOW) as i64;
    let count_f = count as f64;
    let mut total = 0.0;
    let mut windows = 0usize;
    for y in 0..=h - WINDOW {
        for x in 0..=w - WINDOW {
            let (sx, sy) = (sa.window(x, y), sb.window(x, y));
            let mu_x = sx as f64 / count_f;
            let mu_y = sy as f64 / count_f;
            // N^2 times the population moments, exact in integers
            let var_x = (count * saa.window(x, y) - sx * sx) as f64 / (count_f * count_f);
            let var_y = (count * sbb.window(x, y) - sy * sy) as f64 / (count_f * count_f);
            let cov = (count * sab.window(x, y) - sx * sy) as f64 / (count_f * count_f);
            total += ((2.0 * mu_x * mu_y + C1) * (2.0 * cov + C2))
                / ((mu_x * mu_x + mu_y * mu_y + C1) * (var_x + var_y + C2));
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}

/// Per-frame SSIM for two sequences of equal length.
pub fn ssim_per_frame(reference: &[Frame], distorted: &[Frame]) -> Result<Vec<f64>> {
    if reference.len() != distorted.len() {
        return Err(Error::Parameter(format!(
            "frame counts differ: {} vs {}",
            reference.len(),
            distorted.len()
        )));
    }
    if reference.is_empty() {
        return Err(Error::Parameter("sequences contain no frames".into()));
    }
    reference
        .par_iter()
        .zip(distorted)
        .map(|(r, d)| ssim_frame(r, d))
        .collect()
}

/// Arithmetic mean of per-frame SSIM.
pub fn ssim_sequence(reference: &[Frame], distorted: &[Frame]) -> Result<f64> {
    let scores = ssim_per_frame(reference, distorted)?;
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient(w: usize, h: usize, phase: usize) -> Frame {
        let luma = (0..w * h).map(|i| ((i * 7 + phase * 13) % 256) as u8).collect();
        Frame::new(w, h, luma).unwrap()
    }

    #[test]
    fn yuv_frame_counts() {
        let one = vec![0u8; 384];
        assert_eq!(read_yuv420p(&one[..], 16, 16).unwrap().len(), 1);
        assert!(read_yuv420p(&[][..], 16, 16).unwrap().is_empty());
        match read_yuv420p(&vec![0u8; 400][..], 16, 16) {
            Err(Error::TruncatedFrame { offset, available, frame_size }) => {
                assert_eq!((offset, available, frame_size), (384, 16, 384));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_yuv420p(&one[..], 15, 16), Err(Error::Parameter(_))));
    }

    #[test]
    fn yuv_keeps_luma_only() {
        let mut bytes = vec![7u8; 16 * 16];
        bytes.extend(vec![200u8; 128]);
        let f = &read_yuv420p(&bytes[..], 16, 16).unwrap()[0];
        assert!(f.luma().iter().all(|&v| v == 7));
    }

    #[test]
    fn identical_and_constant_frames() {
        let f = gradient(24, 16, 0);
        assert!((ssim_frame(&f, &f).unwrap() - 1.0).abs() < 1e-12);
        let c = Frame::filled(16, 16, 100).unwrap();
        assert_eq!(ssim_frame(&c, &c).unwrap(), 1.0);
    }

    #[test]
    fn constant_shift_closed_form() {
        let a = Frame::filled(16, 16, 100).unwrap();
        let b = Frame::filled(16, 16, 120).unwrap();
        let expected = (2.0 * 100.0 * 120.0 + C1) / (100.0_f64.powi(2) + 120.0_f64.powi(2) + C1);
        assert!((ssim_frame(&a, &b).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.98361092).abs() < 1e-8);
    }

    #[test]
    fn dimension_errors() {
        let a = Frame::filled(16, 16, 0).unwrap();
        let b = Frame::filled(16, 8, 0).unwrap();
        assert!(ssim_frame(&a, &b).is_err());
        let tiny = Frame::filled(4, 4, 0).unwrap();
        assert!(ssim_frame(&tiny, &tiny).is_err());
    }

    #[test]
    fn sequence_mean() {
        let a = gradient(16, 16, 0);
        let b = gradient(16, 16, 3);
        let s1 = ssim_frame(&a, &a).unwrap();
        let s2 = ssim_frame(&a, &b).unwrap();
        let seq = ssim_sequence(&[a.clone(), a.clone()], &[a.clone(), b.clone()]).unwrap();
        assert!((seq - 0.5 * (s1 + s2)).abs() < 1e-15);
        assert_eq!(ssim_sequence(std::slice::from_ref(&a), std::slice::from_ref(&b)).unwrap(), s2);
        assert!(ssim_sequence(std::slice::from_ref(&a), &[]).is_err());
    }
}
