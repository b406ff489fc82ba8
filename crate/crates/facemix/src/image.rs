//! Pixel-grid image type, deterministic bilinear resampling, and PNG I/O.
//!
//! All augmentation operations in this crate work on [`FaceImage`]: an
//! owned, row-major `u8` buffer with 1 (grayscale) or 3 (RGB) interleaved
//! channels. The resampler is written so that the same inputs produce the
//! same bytes on every platform and thread count: plain `f64` arithmetic in
//! a fixed accumulation order, rounded half-up to the nearest intensity.

use std::path::Path;

use crate::error::{Error, Result};

/// Half-open pixel rectangle: `x0 <= x < x1`, `y0 <= y < y1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl PixelRect {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> u32 {
        self.x1.saturating_sub(self.x0)
    }

    pub fn height(&self) -> u32 {
        self.y1.saturating_sub(self.y0)
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width()) * u64::from(self.height())
    }

    pub fn is_empty(&self) -> bool {
        self.x1 <= self.x0 || self.y1 <= self.y0
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }
}

/// An image with 1 or 3 interleaved `u8` channels, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceImage {
    id: String,
    width: u32,
    height: u32,
    channels: u8,
    pixels: Vec<u8>,
}

impl FaceImage {
    /// Build an image from raw pixels, validating the buffer shape.
    pub fn new(
        id: impl Into<String>,
        width: u32,
        height: u32,
        channels: u8,
        pixels: Vec<u8>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        let expected = width as usize * height as usize * channels as usize;
        if pixels.len() != expected {
            return Err(Error::InvalidImage(format!(
                "pixel buffer has {} bytes, expected {expected}",
                pixels.len()
            )));
        }
        Ok(Self {
            id: id.into(),
            width,
            height,
            channels,
            pixels,
        })
    }

    /// Uniform image of a single intensity.
    pub fn filled(id: impl Into<String>, width: u32, height: u32, channels: u8, value: u8) -> Self {
        Self::new(
            id,
            width,
            height,
            channels,
            vec![value; width as usize * height as usize * channels as usize],
        )
        .expect("filled image dimensions are validated by the caller")
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn set_id(&mut self, id: impl Into<String>) {
        self.id = id.into();
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    /// Byte offset of channel 0 at `(x, y)`.
    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32, ch: u8) -> u8 {
        self.pixels[self.offset(x, y) + ch as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, ch: u8, value: u8) {
        let i = self.offset(x, y) + ch as usize;
        self.pixels[i] = value;
    }

    pub fn same_dimensions(&self, other: &FaceImage) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// Pixel-content equality, ignoring the id.
    pub fn same_pixels(&self, other: &FaceImage) -> bool {
        self.same_dimensions(other) && self.pixels == other.pixels
    }

    pub fn rect(&self) -> PixelRect {
        PixelRect::new(0, 0, self.width, self.height)
    }

    fn check_rect(&self, rect: PixelRect) -> Result<()> {
        if rect.x1 > self.width || rect.y1 > self.height || rect.is_empty() {
            return Err(Error::RectOutOfBounds {
                x0: rect.x0,
                y0: rect.y0,
                x1: rect.x1,
                y1: rect.y1,
                width: self.width,
                height: self.height,
            });
        }
        Ok(())
    }

    /// Copy out a sub-image.
    pub fn crop(&self, rect: PixelRect) -> Result<FaceImage> {
        self.check_rect(rect)?;
        let (w, h, c) = (rect.width(), rect.height(), self.channels);
        let mut pixels = Vec::with_capacity(w as usize * h as usize * c as usize);
        for y in rect.y0..rect.y1 {
            let start = self.offset(rect.x0, y);
            let end = self.offset(rect.x1.saturating_sub(1), y) + c as usize;
            pixels.extend_from_slice(&self.pixels[start..end]);
        }
        FaceImage::new(format!("{}@crop", self.id), w, h, c, pixels)
    }

    /// Overwrite `rect` with `src`, whose dimensions must equal the rect's.
    pub fn paste(&mut self, rect: PixelRect, src: &FaceImage) -> Result<()> {
        self.check_rect(rect)?;
        if src.width != rect.width() || src.height != rect.height() || src.channels != self.channels
        {
            return Err(Error::DimensionMismatch {
                a_width: rect.width(),
                a_height: rect.height(),
                b_width: src.width,
                b_height: src.height,
            });
        }
        let row_bytes = rect.width() as usize * self.channels as usize;
        for (sy, y) in (rect.y0..rect.y1).enumerate() {
            let dst_start = self.offset(rect.x0, y);
            let src_start = sy * row_bytes;
            self.pixels[dst_start..dst_start + row_bytes]
                .copy_from_slice(&src.pixels[src_start..src_start + row_bytes]);
        }
        Ok(())
    }

    /// Deterministic bilinear resize.
    ///
    /// Source coordinates use the pixel-center convention
    /// `sx = (dx + 0.5) * sw / dw - 0.5`, clamped to the image; the four
    /// neighbour taps are blended in `f64` in a fixed order (rows first,
    /// then columns) and rounded half-up. Resizing to the source
    /// dimensions reproduces the input bit-for-bit.
    pub fn resize_bilinear(&self, out_width: u32, out_height: u32) -> Result<FaceImage> {
        if out_width == 0 || out_height == 0 {
            return Err(Error::InvalidImage(
                "resize target must have positive dimensions".into(),
            ));
        }
        let (sw, sh, c) = (self.width, self.height, self.channels as usize);
        let scale_x = f64::from(sw) / f64::from(out_width);
        let scale_y = f64::from(sh) / f64::from(out_height);
        let mut pixels = vec![0u8; out_width as usize * out_height as usize * c];

        for dy in 0..out_height {
            let sy = ((f64::from(dy) + 0.5) * scale_y - 0.5).clamp(0.0, f64::from(sh - 1));
            let y0 = sy.floor() as u32;
            let y1 = (y0 + 1).min(sh - 1);
            let fy = sy - f64::from(y0);
            for dx in 0..out_width {
                let sx = ((f64::from(dx) + 0.5) * scale_x - 0.5).clamp(0.0, f64::from(sw - 1));
                let x0 = sx.floor() as u32;
                let x1 = (x0 + 1).min(sw - 1);
                let fx = sx - f64::from(x0);
                for ch in 0..c {
                    let p00 = f64::from(self.pixels[self.offset(x0, y0) + ch]);
                    let p01 = f64::from(self.pixels[self.offset(x1, y0) + ch]);
                    let p10 = f64::from(self.pixels[self.offset(x0, y1) + ch]);
                    let p11 = f64::from(self.pixels[self.offset(x1, y1) + ch]);
                    let top = (1.0 - fx) * p00 + fx * p01;
                    let bottom = (1.0 - fx) * p10 + fx * p11;
                    let value = (1.0 - fy) * top + fy * bottom;
                    let i = (dy as usize * out_width as usize + dx as usize) * c + ch;
                    pixels[i] = value.round().clamp(0.0, 255.0) as u8;
                }
            }
        }
        FaceImage::new(format!("{}@resize", self.id), out_width, out_height, self.channels, pixels)
    }

    /// Load a PNG; 8-bit grayscale stays single-channel, everything else
    /// is converted to RGB. The id is the file stem.
    pub fn load_png(path: impl AsRef<Path>) -> Result<FaceImage> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        match img {
            image::DynamicImage::ImageLuma8(gray) => {
                let (w, h) = gray.dimensions();
                FaceImage::new(id, w, h, 1, gray.into_raw())
            }
            other => {
                let rgb = other.to_rgb8();
                let (w, h) = rgb.dimensions();
                FaceImage::new(id, w, h, 3, rgb.into_raw())
            }
        }
    }

    /// Write as lossless PNG.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let color = if self.channels == 1 {
            image::ExtendedColorType::L8
        } else {
            image::ExtendedColorType::Rgb8
        };
        image::save_buffer(path, &self.pixels, self.width, self.height, color).map_err(
            |source| Error::Image {
                path: path.to_path_buf(),
                source,
            },
        )
    }
}
