//! Supersampling: each output pixel is the mean of a `block x block` patch of
//! subpixels, estimated with one oracle over the patch.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{job_seed, sample_series, Series, SupersampleConfig};
use crate::error::{Error, Result};
use crate::primitives::{Encoding, OracleSpec};

/// Grayscale image with values in `[0, 1]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!("{} values for a {width}x{height} image", data.len())));
        }
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidImage("pixel value outside [0, 1]".into()));
        }
        Ok(GrayImage { width, height, data })
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Subpixels of output pixel `(px, py)`, row-major within the block.
    pub fn block(&self, px: usize, py: usize, block: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(block * block);
        for y in py * block..(py + 1) * block {
            out.extend_from_slice(&self.data[y * self.width + px * block..y * self.width + (px + 1) * block]);
        }
        out
    }

    /// Exact block means.
    pub fn downsample(&self, block: usize) -> Result<GrayImage> {
        self.check_block(block)?;
        let (w, h) = (self.width / block, self.height / block);
        let mut data = Vec::with_capacity(w * h);
        for py in 0..h {
            for px in 0..w {
                let b = self.block(px, py, block);
                data.push((b.iter().sum::<f64>() / b.len() as f64).clamp(0.0, 1.0));
            }
        }
        GrayImage::new(w, h, data)
    }

    fn check_block(&self, block: usize) -> Result<()> {
        if block == 0
            || !self.width.is_multiple_of(block)
            || !self.height.is_multiple_of(block)
            || self.width == 0
            || self.height == 0
        {
            return Err(Error::InvalidImage(format!(
                "{}x{} is not a positive multiple of the {block}-pixel block",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

/// Reads a graymap (any format the decoder knows, typically P5).
pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::Io(io),
        other => Error::InvalidImage(other.to_string()),
    })?;
    let luma = img.to_luma8();
    let (w, h) = luma.dimensions();
    GrayImage::new(w as usize, h as usize, luma.pixels().map(|p| f64::from(p.0[0]) / 255.0).collect())
}

/// Writes a binary (P5) graymap with 8-bit samples.
pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    let bytes: Vec<u8> = img.data.iter().map(|v| (v * 255.0).round() as u8).collect();
    let out = BufWriter::new(File::create(path)?);
    PnmEncoder::new(out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&bytes, img.width as u32, img.height as u32, ExtendedColorType::L8)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::Io(io),
            other => Error::InvalidImage(other.to_string()),
        })
}

/// Rectangle of output pixels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub name: String,
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Region {
    pub fn whole(width: usize, height: usize) -> Self {
        Region { name: "all".into(), x: 0, y: 0, width, height }
    }

    fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.y..self.y + self.height).flat_map(move |y| (self.x..self.x + self.width).map(move |x| (x, y)))
    }

    fn check(&self, width: usize, height: usize) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.x + self.width > width || self.y + self.height > height {
            return Err(Error::param(format!("region `{}` does not fit a {width}x{height} image", self.name)));
        }
        Ok(())
    }
}

/// Test card at `width x height` output pixels with `block` subpixels each.
///
/// Bottom half: five bands of 0, 0.25, 0.5, 0.75 and 1. Top left: the edge of
/// a white disk on black. Top right: a horizontal ramp from 0 to 1. Returns
/// the subpixel image and one region per feature plus `all`.
pub fn synthetic_test_card(width: usize, height: usize, block: usize) -> Result<(GrayImage, Vec<Region>)> {
    if width < 5 || height < 2 || block == 0 {
        return Err(Error::param("synthetic image needs at least 5x2 pixels"));
    }
    let (sw, sh) = (width * block, height * block);
    let top = (height / 2) * block;
    let split = (width / 2) * block;
    let (cx, cy, r) = (0.0, 0.0, 0.8 * top as f64);
    let mut data = Vec::with_capacity(sw * sh);
    for y in 0..sh {
        for x in 0..sw {
            let (fx, fy) = (x as f64 + 0.5, y as f64 + 0.5);
            let v = if y >= top {
                (5 * x / sw) as f64 * 0.25
            } else if x < split {
                if (fx - cx).hypot(fy - cy) <= r {
                    1.0
                } else {
                    0.0
                }
            } else {
                (fx - split as f64) / (sw - split) as f64
            };
            data.push(v);
        }
    }
    let img = GrayImage::new(sw, sh, data)?;
    let top_px = height / 2;
    let split_px = width / 2;
    let mut regions = Vec::new();
    for b in 0..5 {
        let x0 = (b * width).div_ceil(5);
        let x1 = (b + 1) * width / 5;
        if x1 > x0 {
            regions.push(Region {
                name: format!("band-{:.2}", b as f64 * 0.25),
                x: x0,
                y: top_px,
                width: x1 - x0,
                height: height - top_px,
            });
        }
    }
    regions.push(Region { name: "disk".into(), x: 0, y: 0, width: split_px, height: top_px });
    regions.push(Region { name: "gradient".into(), x: split_px, y: 0, width: width - split_px, height: top_px });
    regions.push(Region::whole(width, height));
    Ok((img, regions))
}

/// Mean absolute error of one series in one region for one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionError {
    pub series: String,
    pub run: usize,
    pub region: String,
    pub mae: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupersampleResult {
    pub ideal: GrayImage,
    /// Output of run 0 for each series.
    pub images: Vec<(Series, GrayImage)>,
    pub errors: Vec<RegionError>,
    /// Queries of one pixel estimate per series.
    pub queries: Vec<(Series, u64)>,
}

impl SupersampleResult {
    /// Median over runs of the region MAE.
    pub fn median_mae(&self, series: Series, region: &str) -> Option<f64> {
        let label = series.to_string();
        let mut v: Vec<f64> =
            self.errors.iter().filter(|e| e.series == label && e.region == region).map(|e| e.mae).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let n = v.len();
        Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
    }
}

/// Estimates every pixel of `source` with every configured series, `runs`
/// times. Series share the seed of a `(run, pixel)` job.
pub fn run_supersample(
    config: &SupersampleConfig,
    source: &GrayImage,
    regions: &[Region],
) -> Result<SupersampleResult> {
    config.validate()?;
    let ctx = config.context()?;
    let ideal = source.downsample(config.block)?;
    let (w, h) = (ideal.width, ideal.height);
    for r in regions {
        r.check(w, h)?;
    }
    let series = config.series();
    let jobs: Vec<(usize, usize)> = (0..config.runs).flat_map(|run| (0..w * h).map(move |p| (run, p))).collect();
    let estimates: Vec<Vec<(f64, u64)>> = jobs
        .par_iter()
        .map(|&(run, p)| {
            let (px, py) = (p % w, p / w);
            let oracle = if config.hardware_circuits {
                OracleSpec::direct(ideal.get(px, py), Encoding::SqrtAmplitude)?
            } else {
                OracleSpec::sqrt_amplitude(source.block(px, py, config.block))?
            };
            let seed = job_seed(config.seed_base, &[run as u64, p as u64]);
            series
                .iter()
                .map(|&s| {
                    let e = sample_series(s, &oracle, config.budget, &ctx, seed)?
                        .ok_or_else(|| Error::param(format!("budget {} too small for {s}", config.budget)))?;
                    Ok((e.value, e.queries_used))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut images = Vec::new();
    let mut errors = Vec::new();
    let mut queries = Vec::new();
    for (si, &s) in series.iter().enumerate() {
        queries.push((s, estimates[0][si].1));
        for run in 0..config.runs {
            let values: Vec<f64> = (0..w * h).map(|p| estimates[run * w * h + p][si].0).collect();
            let img = GrayImage::new(w, h, values)?;
            for region in regions {
                let (sum, n) = region
                    .pixels()
                    .fold((0.0, 0usize), |(sum, n), (x, y)| (sum + (img.get(x, y) - ideal.get(x, y)).abs(), n + 1));
                errors.push(RegionError {
                    series: s.to_string(),
                    run,
                    region: region.name.clone(),
                    mae: sum / n as f64,
                });
            }
            if run == 0 {
                images.push((s, img));
            }
        }
    }
    Ok(SupersampleResult { ideal, images, errors, queries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::Algorithm;
    use crate::harness::config::ImageSource;

    fn config(budget: u64, algorithms: Vec<Algorithm>) -> SupersampleConfig {
        SupersampleConfig {
            seed_base: 1,
            image: ImageSource::Synthetic { width: 10, height: 4 },
            budget,
            algorithms,
            qcoin_k: vec![3],
            block: 8,
            runs: 2,
            noise: Default::default(),
            hardware_circuits: false,
            regions: Vec::new(),
        }
    }

    #[test]
    fn test_card_layout() {
        let (img, regions) = synthetic_test_card(10, 4, 8).unwrap();
        let ideal = img.downsample(8).unwrap();
        assert_eq!((ideal.width, ideal.height), (10, 4));
        let names: Vec<_> = regions.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["band-0.00", "band-0.25", "band-0.50", "band-0.75", "band-1.00", "disk", "gradient", "all"]);
        for (b, r) in regions[..5].iter().enumerate() {
            for (x, y) in r.pixels() {
                assert_eq!(ideal.get(x, y), b as f64 * 0.25);
            }
        }
        // The gradient rises from left to right.
        assert!(ideal.get(5, 0) < ideal.get(9, 0));
    }

    #[test]
    fn uniform_bands_and_large_budgets() {
        let (img, regions) = synthetic_test_card(10, 4, 8).unwrap();
        let r = run_supersample(&config(20000, vec![Algorithm::MonteCarlo, Algorithm::Qcoin]), &img, &regions).unwrap();
        assert_eq!(r.errors.len(), 2 * 2 * regions.len());
        for s in [Series::MonteCarlo, Series::Qcoin(3)] {
            assert!(r.median_mae(s, "all").unwrap() < 0.01);
            // Constant black and white bands are exact for Monte Carlo and
            // for the black band of QCoin.
            assert!(r.median_mae(s, "band-0.00").unwrap() < 1e-12);
        }
        assert_eq!(r.median_mae(Series::MonteCarlo, "band-1.00").unwrap(), 0.0);
    }

    #[test]
    fn qss_values_lie_on_grid() {
        let (img, regions) = synthetic_test_card(5, 2, 8).unwrap();
        let mut cfg = config(31, vec![Algorithm::Qss]);
        cfg.runs = 1;
        let r = run_supersample(&cfg, &img, &regions).unwrap();
        let grid = crate::estimators::qss_estimate_grid(16);
        for v in &r.images[0].1.data {
            assert!(grid.iter().any(|g| (g - v).abs() < 1e-12));
        }
        assert_eq!(r.queries, vec![(Series::Qss, 31)]);
    }

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pgm");
        let img = GrayImage::new(3, 2, vec![0.0, 0.5, 1.0, 0.25, 0.75, 1.0]).unwrap();
        write_pgm(&path, &img).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5"));
        let back = read_pgm(&path).unwrap();
        assert_eq!((back.width, back.height), (3, 2));
        for (a, b) in back.data.iter().zip(&img.data) {
            assert!((a - b).abs() <= 0.5 / 255.0);
        }
        assert!(img.downsample(2).is_err());
        assert!(matches!(read_pgm(&dir.path().join("missing.pgm")), Err(Error::Io(_))));
    }
}
