//! Real-valued image tensors in H x W x C layout.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ImageError {
    #[error("image dimensions must be positive, got {height}x{width}")]
    EmptyDimension { height: usize, width: usize },
    #[error("channel count must be 1 or 3, got {0}")]
    BadChannels(usize),
    #[error("data length {got} does not match {height}x{width}x{channels} = {expected}")]
    BadLength {
        height: usize,
        width: usize,
        channels: usize,
        expected: usize,
        got: usize,
    },
    #[error("non-finite pixel value at flat index {0}")]
    NonFinite(usize),
}

/// An image with `height * width * channels` finite real samples, nominally in
/// `[0, 1]`, stored row-major with interleaved channels: index `(h, w, c)`
/// maps to `(h * width + w) * channels + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ImageTensor {
    pub fn new(
        height: usize,
        width: usize,
        channels: usize,
        data: Vec<f64>,
    ) -> Result<Self, ImageError> {
        if height == 0 || width == 0 {
            return Err(ImageError::EmptyDimension { height, width });
        }
        if channels != 1 && channels != 3 {
            return Err(ImageError::BadChannels(channels));
        }
        let expected = height * width * channels;
        if data.len() != expected {
            return Err(ImageError::BadLength {
                height,
                width,
                channels,
                expected,
                got: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(ImageError::NonFinite(i));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self, ImageError> {
        Self::new(height, width, channels, vec![0.0; height * width * channels])
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    #[inline]
    pub fn get(&self, h: usize, w: usize, c: usize) -> f64 {
        self.data[(h * self.width + w) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, h: usize, w: usize, c: usize, v: f64) {
        self.data[(h * self.width + w) * self.channels + c] = v;
    }

    /// Copies one channel into a contiguous `height * width` row-major plane.
    pub fn channel_plane(&self, c: usize) -> Vec<f64> {
        assert!(c < self.channels, "channel {c} out of range");
        let mut plane = Vec::with_capacity(self.height * self.width);
        for hw in 0..self.height * self.width {
            plane.push(self.data[hw * self.channels + c]);
        }
        plane
    }

    /// Clamps every sample to `[0, 1]` in place.
    pub fn clamp01(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
    }

    /// Bilinear resampling to a new spatial size (channel count unchanged).
    /// Sample positions follow the half-pixel-center convention, with source
    /// coordinates clamped at the borders.
    pub fn resize_bilinear(&self, new_height: usize, new_width: usize) -> Self {
        assert!(new_height > 0 && new_width > 0, "target size must be positive");
        if new_height == self.height && new_width == self.width {
            return self.clone();
        }
        let sy = self.height as f64 / new_height as f64;
        let sx = self.width as f64 / new_width as f64;
        let mut data = vec![0.0; new_height * new_width * self.channels];
        for oh in 0..new_height {
            let fy = ((oh as f64 + 0.5) * sy - 0.5).clamp(0.0, (self.height - 1) as f64);
            let y0 = fy.floor() as usize;
            let y1 = (y0 + 1).min(self.height - 1);
            let wy = fy - y0 as f64;
            for ow in 0..new_width {
                let fx = ((ow as f64 + 0.5) * sx - 0.5).clamp(0.0, (self.width - 1) as f64);
                let x0 = fx.floor() as usize;
                let x1 = (x0 + 1).min(self.width - 1);
                let wx = fx - x0 as f64;
                for c in 0..self.channels {
                    let v00 = self.get(y0, x0, c);
                    let v01 = self.get(y0, x1, c);
                    let v10 = self.get(y1, x0, c);
                    let v11 = self.get(y1, x1, c);
                    let top = v00 + (v01 - v00) * wx;
                    let bot = v10 + (v11 - v10) * wx;
                    data[(oh * new_width + ow) * self.channels + c] = top + (bot - top) * wy;
                }
            }
        }
        Self {
            height: new_height,
            width: new_width,
            channels: self.channels,
            data,
        }
    }

    /// Largest absolute per-sample difference; shapes must match.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
