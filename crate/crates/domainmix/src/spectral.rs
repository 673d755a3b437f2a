//! Exact 2D discrete Fourier analysis of image channels.
//!
//! The forward transform is the plain unnormalized double sum
//! `F(u,v) = sum_h sum_w x(h,w) exp(-j 2 pi (h u / H + w v / W))`, applied to
//! each channel independently; the inverse carries the `1/(H W)` factor. No
//! quadrant shifting is performed anywhere: coefficients stay in natural
//! `(u, v)` order with the DC term at `(0, 0)`.

use num_complex::Complex;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use thiserror::Error;

use crate::image::ImageTensor;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("spectrum dimensions must be positive, got {height}x{width}")]
    EmptyDimension { height: usize, width: usize },
    #[error("channel count must be 1 or 3, got {0}")]
    BadChannels(usize),
    #[error("coefficient count {got} does not match {height}x{width}x{channels}")]
    BadLength {
        height: usize,
        width: usize,
        channels: usize,
        got: usize,
    },
    #[error("non-finite coefficient at flat index {0}")]
    NonFinite(usize),
    #[error(
        "inverse transform left imaginary residue {max_im:.3e} above bound {bound:.3e}; \
         the spectrum is not conjugate-symmetric"
    )]
    ImaginaryResidue { max_im: f64, bound: f64 },
    #[error("negative amplitude {value} at flat index {index}")]
    NegativeAmplitude { index: usize, value: f64 },
}

/// Per-channel complex frequency grid of an `H x W x C` image. Coefficients
/// are stored channel-planar: index `(c, u, v)` maps to `(c * H + u) * W + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    height: usize,
    width: usize,
    channels: usize,
    coeff: Vec<Complex<f64>>,
}

impl Spectrum {
    pub fn new(
        height: usize,
        width: usize,
        channels: usize,
        coeff: Vec<Complex<f64>>,
    ) -> Result<Self, SpectralError> {
        check_dims(height, width, channels)?;
        if coeff.len() != height * width * channels {
            return Err(SpectralError::BadLength {
                height,
                width,
                channels,
                got: coeff.len(),
            });
        }
        if let Some(i) = coeff.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SpectralError::NonFinite(i));
        }
        Ok(Self {
            height,
            width,
            channels,
            coeff,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn coeff(&self) -> &[Complex<f64>] {
        &self.coeff
    }

    #[inline]
    pub fn at(&self, c: usize, u: usize, v: usize) -> Complex<f64> {
        self.coeff[(c * self.height + u) * self.width + v]
    }
}

/// Polar form of a [`Spectrum`]: nonnegative amplitudes and phases in
/// `(-pi, pi]`, same channel-planar layout.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudePhase {
    height: usize,
    width: usize,
    channels: usize,
    amplitude: Vec<f64>,
    phase: Vec<f64>,
}

impl AmplitudePhase {
    pub fn new(
        height: usize,
        width: usize,
        channels: usize,
        amplitude: Vec<f64>,
        phase: Vec<f64>,
    ) -> Result<Self, SpectralError> {
        check_dims(height, width, channels)?;
        let expected = height * width * channels;
        if amplitude.len() != expected || phase.len() != expected {
            return Err(SpectralError::BadLength {
                height,
                width,
                channels,
                got: amplitude.len().max(phase.len()),
            });
        }
        for (i, (&a, &p)) in amplitude.iter().zip(&phase).enumerate() {
            if !a.is_finite() || !p.is_finite() {
                return Err(SpectralError::NonFinite(i));
            }
            if a < 0.0 {
                return Err(SpectralError::NegativeAmplitude { index: i, value: a });
            }
        }
        Ok(Self {
            height,
            width,
            channels,
            amplitude,
            phase,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn amplitude(&self) -> &[f64] {
        &self.amplitude
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    /// Replaces the amplitude array, keeping phases. Amplitudes must be
    /// nonnegative and of matching length.
    pub fn with_amplitude(&self, amplitude: Vec<f64>) -> Result<Self, SpectralError> {
        Self::new(
            self.height,
            self.width,
            self.channels,
            amplitude,
            self.phase.clone(),
        )
    }
}

fn check_dims(height: usize, width: usize, channels: usize) -> Result<(), SpectralError> {
    if height == 0 || width == 0 {
        return Err(SpectralError::EmptyDimension { height, width });
    }
    if channels != 1 && channels != 3 {
        return Err(SpectralError::BadChannels(channels));
    }
    Ok(())
}

thread_local! {
    // plans are cached per thread; batch pipelines transform the same sizes
    // over and over
    static PLANNER: std::cell::RefCell<FftPlanner<f64>> = std::cell::RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> std::sync::Arc<dyn rustfft::Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Runs length-`width` transforms over every row, then length-`height`
/// transforms over every column of a row-major `height x width` plane.
fn transform_plane(plane: &mut [Complex<f64>], height: usize, width: usize, inverse: bool) {
    let row_fft = plan(width, inverse);
    for row in plane.chunks_exact_mut(width) {
        row_fft.process(row);
    }
    let col_fft = plan(height, inverse);
    let mut col = vec![Complex::new(0.0, 0.0); height];
    for v in 0..width {
        for u in 0..height {
            col[u] = plane[u * width + v];
        }
        col_fft.process(&mut col);
        for u in 0..height {
            plane[u * width + v] = col[u];
        }
    }
}

/// Forward 2D DFT of every channel, unnormalized.
pub fn fft2d(image: &ImageTensor) -> Spectrum {
    let (h, w, ch) = (image.height(), image.width(), image.channels());
    let mut coeff = Vec::with_capacity(h * w * ch);
    for c in 0..ch {
        let mut plane: Vec<Complex<f64>> = image
            .channel_plane(c)
            .into_iter()
            .map(|v| Complex::new(v, 0.0))
            .collect();
        transform_plane(&mut plane, h, w, false);
        coeff.extend_from_slice(&plane);
    }
    Spectrum {
        height: h,
        width: w,
        channels: ch,
        coeff,
    }
}

/// Inverse 2D DFT with `1/(H W)` normalization. The imaginary parts are
/// discarded after checking `max |Im| <= 1e-6 * max(1, max |Re|)`; a larger
/// residue means the spectrum did not come from a real image and is reported
/// as an error.
pub fn ifft2d(spec: &Spectrum) -> Result<ImageTensor, SpectralError> {
    let (h, w, ch) = (spec.height, spec.width, spec.channels);
    let scale = 1.0 / (h * w) as f64;
    let mut data = vec![0.0; h * w * ch];
    let mut max_im: f64 = 0.0;
    let mut max_re: f64 = 0.0;
    for c in 0..ch {
        let mut plane = spec.coeff[c * h * w..(c + 1) * h * w].to_vec();
        transform_plane(&mut plane, h, w, true);
        for (hw, z) in plane.iter().enumerate() {
            let re = z.re * scale;
            let im = z.im * scale;
            max_im = max_im.max(im.abs());
            max_re = max_re.max(re.abs());
            data[hw * ch + c] = re;
        }
    }
    let bound = 1e-6 * max_re.max(1.0);
    if max_im > bound {
        return Err(SpectralError::ImaginaryResidue { max_im, bound });
    }
    Ok(ImageTensor::new(h, w, ch, data).expect("inverse transform output is well-formed"))
}

/// Splits a spectrum into amplitude `|F|` and phase `arg F`, with the phase of
/// an exactly zero coefficient defined as 0.
pub fn decompose(spec: &Spectrum) -> AmplitudePhase {
    let n = spec.coeff.len();
    let mut amplitude = Vec::with_capacity(n);
    let mut phase = Vec::with_capacity(n);
    for z in &spec.coeff {
        // plain sqrt instead of hypot: coefficients are image-scale, so
        // there is no overflow to guard, and this is a hot path
        amplitude.push((z.re * z.re + z.im * z.im).sqrt());
        phase.push(if z.re == 0.0 && z.im == 0.0 {
            0.0
        } else {
            let p = z.im.atan2(z.re);
            if p == -PI {
                PI
            } else {
                p
            }
        });
    }
    AmplitudePhase {
        height: spec.height,
        width: spec.width,
        channels: spec.channels,
        amplitude,
        phase,
    }
}

/// Rebuilds `amplitude * exp(j phase)` coefficients from polar form.
pub fn recompose(ap: &AmplitudePhase) -> Result<Spectrum, SpectralError> {
    for (i, &a) in ap.amplitude.iter().enumerate() {
        if a < 0.0 {
            return Err(SpectralError::NegativeAmplitude { index: i, value: a });
        }
    }
    let coeff = ap
        .amplitude
        .iter()
        .zip(&ap.phase)
        .map(|(&a, &p)| Complex::from_polar(a, p))
        .collect();
    Ok(Spectrum {
        height: ap.height,
        width: ap.width,
        channels: ap.channels,
        coeff,
    })
}
