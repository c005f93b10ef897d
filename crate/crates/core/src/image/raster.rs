use std::path::Path;

use image::{DynamicImage, ImageReader};

use crate::{Error, Result};

/// Decoded 8-bit raster, row-major with interleaved channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions(format!("{width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::UnsupportedChannels(channels));
        }
        if samples.len() != width * height * channels {
            return Err(Error::InvalidDimensions(format!(
                "{} samples for {width}x{height}x{channels}",
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    /// Builds an image by evaluating `f(x, y, channel)` at every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    samples.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Sample at `(x, y)` in channel `c`.
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.samples[(y * self.width + x) * self.channels + c]
    }

    /// One channel as a real-valued plane.
    pub fn channel_plane(&self, c: usize) -> super::LumaPlane {
        let data = self
            .samples
            .iter()
            .skip(c)
            .step_by(self.channels)
            .map(|&v| f64::from(v))
            .collect();
        super::LumaPlane::from_vec(self.width, self.height, data)
            .expect("channel plane has image dimensions")
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub(crate) fn check_same_shape(&self, other: &Image) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "{}x{}x{} vs {}x{}x{}",
                self.width, self.height, self.channels, other.width, other.height, other.channels
            )))
        }
    }
}

/// Decodes a PNG or BMP file into an 8-bit [`Image`].
///
/// Alpha channels are dropped. 16-bit and floating point sources are rejected.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_image(&bytes)
}

/// [`load_image`] on an in-memory PNG or BMP stream.
pub fn decode_image(bytes: &[u8]) -> Result<Image> {
    let reader = ImageReader::new(std::io::Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::Decode(e.to_string()))?;
    let decoded = reader.decode().map_err(|e| Error::Decode(e.to_string()))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    match decoded {
        DynamicImage::ImageLuma8(buf) => Image::new(width, height, 1, buf.into_raw()),
        DynamicImage::ImageRgb8(buf) => Image::new(width, height, 3, buf.into_raw()),
        DynamicImage::ImageLumaA8(buf) => {
            let raw = buf.into_raw();
            Image::new(
                width,
                height,
                1,
                raw.chunks_exact(2).map(|p| p[0]).collect(),
            )
        }
        DynamicImage::ImageRgba8(buf) => {
            let raw = buf.into_raw();
            let rgb = raw
                .chunks_exact(4)
                .flat_map(|p| [p[0], p[1], p[2]])
                .collect();
            Image::new(width, height, 3, rgb)
        }
        other => Err(Error::UnsupportedBitDepth(format!("{:?}", other.color()))),
    }
}

impl Image {
    /// Writes the image as an 8-bit gray or RGB PNG.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let (w, h) = (self.width as u32, self.height as u32);
        let color = if self.channels == 1 {
            image::ExtendedColorType::L8
        } else {
            image::ExtendedColorType::Rgb8
        };
        image::save_buffer_with_format(path, &self.samples, w, h, color, image::ImageFormat::Png)
            .map_err(|e| match e {
                image::ImageError::IoError(source) => Error::Io {
                    path: path.to_path_buf(),
                    source,
                },
                other => Error::Decode(other.to_string()),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{ImageBuffer, Luma, Rgb};

    #[test]
    fn png_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for channels in [1, 3] {
            let img =
                Image::from_fn(13, 7, channels, |x, y, c| (x * 19 + y * 7 + c * 50) as u8).unwrap();
            let path = dir.path().join(format!("c{channels}.png"));
            img.save_png(&path).unwrap();
            assert_eq!(load_image(&path).unwrap(), img);
        }
    }

    fn encode_png(img: DynamicImage) -> Vec<u8> {
        let mut out = std::io::Cursor::new(Vec::new());
        img.write_to(&mut out, image::ImageFormat::Png).unwrap();
        out.into_inner()
    }

    #[test]
    fn decodes_rgb_png_round_trip() {
        let buf = ImageBuffer::from_fn(299, 299, |x, y| Rgb([(x % 256) as u8, (y % 256) as u8, 7]));
        let png = encode_png(DynamicImage::ImageRgb8(buf.clone()));
        let img = decode_image(&png).unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (299, 299, 3));
        assert_eq!(img.samples(), buf.as_raw().as_slice());
    }

    #[test]
    fn truncated_stream_is_a_decode_error() {
        let buf = ImageBuffer::from_fn(32, 32, |x, y| Rgb([x as u8, y as u8, 0]));
        let png = encode_png(DynamicImage::ImageRgb8(buf));
        let err = decode_image(&png[..png.len() / 2]).unwrap_err();
        assert!(matches!(err, Error::Decode(_)), "{err}");
    }

    #[test]
    fn single_black_gray_pixel() {
        let buf: ImageBuffer<Luma<u8>, _> = ImageBuffer::from_pixel(1, 1, Luma([0]));
        let img = decode_image(&encode_png(DynamicImage::ImageLuma8(buf))).unwrap();
        assert_eq!(img, Image::new(1, 1, 1, vec![0]).unwrap());
    }

    #[test]
    fn sixteen_bit_sources_are_rejected() {
        let buf: ImageBuffer<Luma<u16>, _> = ImageBuffer::from_pixel(4, 4, Luma([1000]));
        let err = decode_image(&encode_png(DynamicImage::ImageLuma16(buf))).unwrap_err();
        assert!(matches!(err, Error::UnsupportedBitDepth(_)), "{err}");
    }

    #[test]
    fn missing_file() {
        let err = load_image("/definitely/not/here.png").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Image::new(0, 1, 1, vec![]).is_err());
        assert!(Image::new(2, 2, 2, vec![0; 8]).is_err());
        assert!(Image::new(2, 2, 3, vec![0; 11]).is_err());
    }
}
