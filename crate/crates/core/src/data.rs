//! Wind-turbine dataset: CSV ingestion, train/test splitting, min-max
//! scaling and a synthetic generator.
//!
//! All randomness (split shuffles, synthetic rows) is driven by
//! [`RNG_ALGORITHM`], seeded with `seed_from_u64`.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform, Weibull};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name and version of the PRNG behind every seeded draw. Config files must
/// quote this string verbatim.
pub const RNG_ALGORITHM: &str = "chacha8/rand_chacha-0.9";

pub const N_FEATURES: usize = 4;
pub const FEATURE_NAMES: [&str; N_FEATURES] =
    ["wind_speed", "wind_direction", "pressure", "temperature"];

/// One 10-minute observation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    /// m/s
    pub wind_speed: f64,
    /// degrees in [0, 360)
    pub wind_direction: f64,
    /// hPa
    pub pressure: f64,
    /// degrees C
    pub temperature: f64,
    /// kW
    pub power: f64,
}

impl Record {
    pub fn features(&self) -> [f64; N_FEATURES] {
        [
            self.wind_speed,
            self.wind_direction,
            self.pressure,
            self.temperature,
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub records: Vec<Record>,
}

impl Dataset {
    pub fn new(records: Vec<Record>) -> Self {
        Dataset { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn features(&self) -> Vec<[f64; N_FEATURES]> {
        self.records.iter().map(Record::features).collect()
    }

    pub fn power(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.power).collect()
    }

    fn select(&self, indices: &[usize]) -> Dataset {
        Dataset::new(indices.iter().map(|&i| self.records[i]).collect())
    }

    /// Writes the dataset in the ingestion schema (no timestamp column).
    pub fn write_csv(&self, path: &Path, schema: &CsvSchema) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let header = [
            schema.wind_speed.as_str(),
            schema.wind_direction.as_str(),
            schema.pressure.as_str(),
            schema.temperature.as_str(),
            schema.power.as_str(),
        ];
        w.write_record(header).map_err(|e| Error::csv(path, e))?;
        for r in &self.records {
            w.write_record([
                r.wind_speed.to_string(),
                r.wind_direction.to_string(),
                r.pressure.to_string(),
                r.temperature.to_string(),
                r.power.to_string(),
            ])
            .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Header names for the five data columns. A timestamp column may be
/// present in the file and is ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsvSchema {
    pub wind_speed: String,
    pub wind_direction: String,
    pub pressure: String,
    pub temperature: String,
    pub power: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            wind_speed: "wind_speed".into(),
            wind_direction: "wind_direction".into(),
            pressure: "pressure".into(),
            temperature: "temperature".into(),
            power: "power".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    /// Rows skipped for a missing, unparseable or non-finite cell, or a
    /// negative power reading.
    pub dropped: usize,
}

pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<LoadedCsv> {
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ));
    }
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(name.to_string()))
    };
    let idx = [
        column(&schema.wind_speed)?,
        column(&schema.wind_direction)?,
        column(&schema.pressure)?,
        column(&schema.temperature)?,
        column(&schema.power)?,
    ];

    let mut records = Vec::new();
    let mut dropped = 0usize;
    for row in reader.records() {
        let row = match row {
            Ok(row) => row,
            Err(e) if e.is_io_error() => return Err(Error::csv(path, e)),
            Err(_) => {
                dropped += 1;
                continue;
            }
        };
        let cell = |i: usize| -> Option<f64> {
            row.get(i)
                .filter(|s| !s.is_empty())
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
        };
        let parsed = (|| {
            Some(Record {
                wind_speed: cell(idx[0])?,
                wind_direction: cell(idx[1])?.rem_euclid(360.0),
                pressure: cell(idx[2])?,
                temperature: cell(idx[3])?,
                power: cell(idx[4]).filter(|p| *p >= 0.0)?,
            })
        })();
        match parsed {
            Some(r) => records.push(r),
            None => dropped += 1,
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyData);
    }
    Ok(LoadedCsv {
        dataset: Dataset::new(records),
        dropped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitMode {
    /// Fisher-Yates shuffle of row indices, then cut.
    ShuffledSeeded(u64),
    /// Cut in file order; the test set is the tail.
    Chronological,
}

/// Train and test row indices. The train set has `floor(fraction * n)`
/// rows.
pub fn split_indices(n: usize, fraction: f64, mode: SplitMode) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction must lie in (0, 1), got {fraction}"
        )));
    }
    if n == 0 {
        return Err(Error::EmptyData);
    }
    let mut order: Vec<usize> = (0..n).collect();
    if let SplitMode::ShuffledSeeded(seed) = mode {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
    }
    let n_train = (fraction * n as f64).floor() as usize;
    let test = order.split_off(n_train);
    Ok((order, test))
}

pub fn split(dataset: &Dataset, fraction: f64, mode: SplitMode) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(dataset.len(), fraction, mode)?;
    Ok((dataset.select(&train), dataset.select(&test)))
}

/// Affine map from `[min, max]` onto `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub min: f64,
    pub max: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ColumnScale {
    pub fn fit(name: &str, values: impl Iterator<Item = f64>, lo: f64, hi: f64) -> Result<Self> {
        let (min, max) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        if !(max > min) {
            return Err(Error::DegenerateScale(name.to_string()));
        }
        Ok(ColumnScale { min, max, lo, hi })
    }

    /// Scales `v`, clipping to `[lo, hi]`.
    pub fn apply(&self, v: f64) -> f64 {
        let t = (v - self.min) / (self.max - self.min);
        (self.lo + t * (self.hi - self.lo)).clamp(self.lo, self.hi)
    }

    pub fn invert(&self, s: f64) -> f64 {
        self.min + (s - self.lo) / (self.hi - self.lo) * (self.max - self.min)
    }
}

/// Fitted min-max transforms: features onto `feature_range`, power onto
/// `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec {
    pub features: [ColumnScale; N_FEATURES],
    pub target: ColumnScale,
}

pub const DEFAULT_FEATURE_RANGE: (f64, f64) = (0.0, PI);
pub const TARGET_RANGE: (f64, f64) = (-1.0, 1.0);

impl ScalingSpec {
    pub fn fit(train: &Dataset, feature_range: (f64, f64)) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyData);
        }
        if !(feature_range.1 > feature_range.0) {
            return Err(Error::invalid(format!(
                "feature range must be increasing, got {feature_range:?}"
            )));
        }
        let mut features = [ColumnScale {
            min: 0.0,
            max: 1.0,
            lo: 0.0,
            hi: 1.0,
        }; N_FEATURES];
        for (k, scale) in features.iter_mut().enumerate() {
            *scale = ColumnScale::fit(
                FEATURE_NAMES[k],
                train.records.iter().map(|r| r.features()[k]),
                feature_range.0,
                feature_range.1,
            )?;
        }
        let target = ColumnScale::fit(
            "power",
            train.records.iter().map(|r| r.power),
            TARGET_RANGE.0,
            TARGET_RANGE.1,
        )?;
        Ok(ScalingSpec { features, target })
    }

    pub fn scale_features(&self, x: &[f64; N_FEATURES]) -> Vec<f64> {
        x.iter()
            .zip(&self.features)
            .map(|(v, s)| s.apply(*v))
            .collect()
    }

    pub fn scale_target(&self, kw: f64) -> f64 {
        self.target.apply(kw)
    }

    pub fn invert_target(&self, scaled: f64) -> f64 {
        self.target.invert(scaled)
    }

    pub fn apply(&self, dataset: &Dataset) -> ScaledSet {
        ScaledSet {
            features: dataset
                .records
                .iter()
                .map(|r| self.scale_features(&r.features()))
                .collect(),
            targets: dataset
                .records
                .iter()
                .map(|r| self.scale_target(r.power))
                .collect(),
            targets_kw: dataset.power(),
        }
    }
}

/// A dataset after scaling, with the physical targets kept alongside.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledSet {
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub targets_kw: Vec<f64>,
}

impl ScaledSet {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Idealized turbine curve used by the synthetic generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerCurve {
    pub cut_in: f64,
    pub rated_speed: f64,
    pub cut_out: f64,
    pub rated_power: f64,
}

impl Default for PowerCurve {
    fn default() -> Self {
        PowerCurve {
            cut_in: 3.5,
            rated_speed: 13.0,
            cut_out: 25.0,
            rated_power: 2031.0,
        }
    }
}

impl PowerCurve {
    /// Noiseless output in kW: zero outside `[cut_in, cut_out]`, cubic ramp
    /// up to rated speed, flat at rated power above it.
    pub fn power(&self, speed: f64) -> f64 {
        if speed < self.cut_in || speed > self.cut_out {
            0.0
        } else if speed >= self.rated_speed {
            self.rated_power
        } else {
            let c3 = self.cut_in.powi(3);
            self.rated_power * (speed.powi(3) - c3) / (self.rated_speed.powi(3) - c3)
        }
    }
}

/// Synthetic observations: Weibull(k=2, lambda=8) wind speed, uniform
/// direction, Normal(1013, 5) hPa pressure, Normal(12, 5) C temperature,
/// and power from [`PowerCurve`] plus Normal(0, 30) kW noise clipped at 0.
pub fn generate_synthetic(n_rows: usize, seed: u64) -> Result<Dataset> {
    if n_rows == 0 {
        return Err(Error::invalid("n_rows must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let speed = Weibull::new(8.0, 2.0).expect("valid Weibull");
    let direction = Uniform::new(0.0, 360.0).expect("valid range");
    let pressure = Normal::new(1013.0, 5.0).expect("valid normal");
    let temperature = Normal::new(12.0, 5.0).expect("valid normal");
    let noise = Normal::new(0.0, 30.0).expect("valid normal");
    let curve = PowerCurve::default();
    let records = (0..n_rows)
        .map(|_| {
            let wind_speed = speed.sample(&mut rng);
            let wind_direction = direction.sample(&mut rng);
            let pressure = pressure.sample(&mut rng);
            let temperature = temperature.sample(&mut rng);
            let power = (curve.power(wind_speed) + noise.sample(&mut rng)).max(0.0);
            Record {
                wind_speed,
                wind_direction,
                pressure,
                temperature,
                power,
            }
        })
        .collect();
    Ok(Dataset::new(records))
}
