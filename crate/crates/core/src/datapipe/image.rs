use std::path::Path;

use image::{DynamicImage, RgbImage};
use nalgebra::DMatrix;

use super::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageShape {
    pub width: usize,
    pub height: usize,
}

impl ImageShape {
    pub fn pixels(&self) -> usize {
        self.width * self.height
    }
}

/// Pixel features of one or more images stacked row-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageFeatures {
    /// `n x 3`, values in `[0, 255]`
    pub rgb: FeatureMatrix,
    /// `n x 2`, `(column, row)` within the pixel's own image
    pub xy: FeatureMatrix,
    pub shapes: Vec<ImageShape>,
    /// image index of every row
    pub components: Vec<usize>,
}

impl ImageFeatures {
    /// `[r, g, b, x, y]` per row.
    pub fn combined(&self) -> FeatureMatrix {
        let (n, rgb, xy) = (self.rgb.n(), self.rgb.matrix(), self.xy.matrix());
        let x = DMatrix::from_fn(
            n,
            5,
            |i, j| if j < 3 { rgb[(i, j)] } else { xy[(i, j - 3)] },
        );
        FeatureMatrix::new(x)
            .expect("finite by construction")
            .with_names(["r", "g", "b", "x", "y"].map(String::from).to_vec())
            .expect("five names")
    }

    /// Splits a per-row vector into one row-major raster per image.
    pub fn split<'a, T>(&self, values: &'a [T]) -> Result<Vec<&'a [T]>> {
        if values.len() != self.components.len() {
            return Err(Error::DimensionMismatch {
                expected: self.components.len(),
                got: values.len(),
            });
        }
        let mut out = Vec::with_capacity(self.shapes.len());
        let mut at = 0;
        for s in &self.shapes {
            out.push(&values[at..at + s.pixels()]);
            at += s.pixels();
        }
        Ok(out)
    }
}

/// Reads an 8-bit RGB (or RGBA, alpha dropped) PNG.
pub fn load_rgb_png(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let img = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()?;
    match img {
        DynamicImage::ImageRgb8(i) => Ok(i),
        DynamicImage::ImageRgba8(i) => Ok(DynamicImage::ImageRgba8(i).to_rgb8()),
        other => Err(Error::InvalidArgument(format!(
            "{}: unsupported pixel format {:?}, expected 8-bit RGB",
            path.display(),
            other.color()
        ))),
    }
}

/// Row-major pixel vectorization of a single image.
pub fn image_to_features(img: &RgbImage) -> Result<ImageFeatures> {
    images_to_features(std::slice::from_ref(img))
}

/// Concatenates the pixels of several images; `components` records the source image.
pub fn images_to_features(images: &[RgbImage]) -> Result<ImageFeatures> {
    if images.is_empty() {
        return Err(Error::InvalidArgument("no images given".into()));
    }
    let shapes: Vec<ImageShape> = images
        .iter()
        .map(|i| ImageShape {
            width: i.width() as usize,
            height: i.height() as usize,
        })
        .collect();
    let n: usize = shapes.iter().map(ImageShape::pixels).sum();
    if n == 0 {
        return Err(Error::InvalidArgument("images have no pixels".into()));
    }
    let mut rgb = DMatrix::zeros(n, 3);
    let mut xy = DMatrix::zeros(n, 2);
    let mut components = Vec::with_capacity(n);
    let mut at = 0;
    for (c, img) in images.iter().enumerate() {
        for (x, y, px) in img.enumerate_pixels() {
            let i = at + y as usize * shapes[c].width + x as usize;
            for k in 0..3 {
                rgb[(i, k)] = f64::from(px.0[k]);
            }
            xy[(i, 0)] = f64::from(x);
            xy[(i, 1)] = f64::from(y);
        }
        components.extend(std::iter::repeat_n(c, shapes[c].pixels()));
        at += shapes[c].pixels();
    }
    Ok(ImageFeatures {
        rgb: FeatureMatrix::new(rgb)?,
        xy: FeatureMatrix::new(xy)?,
        shapes,
        components,
    })
}
