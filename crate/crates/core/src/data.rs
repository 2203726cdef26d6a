//! Dataset ingestion, synthetic generation, splits and resizing.
//!
//! Images are stored channel-first as `f32` pixels in `[0, 1]`:
//! image `i` occupies `images[i * c*h*w .. (i+1) * c*h*w]` laid out `(c, h, w)`.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Tensor;
use crate::rng::{derive_seed, stream};

pub const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABEL_MAGIC: u32 = 0x0000_0801;
pub const CIFAR_IMAGE_BYTES: usize = 3 * 32 * 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Clean,
    Noisy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub images: Vec<f32>,
    /// `[channels, height, width]`
    pub image_shape: [usize; 3],
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub label_kind: LabelKind,
}

impl LabeledDataset {
    pub fn new(
        name: impl Into<String>,
        images: Vec<f32>,
        image_shape: [usize; 3],
        labels: Vec<usize>,
        num_classes: usize,
        label_kind: LabelKind,
    ) -> Result<Self> {
        let per: usize = image_shape.iter().product();
        if per == 0 || !images.len().is_multiple_of(per) {
            return Err(Error::ShapeMismatch(format!(
                "{} pixels do not divide into images of shape {image_shape:?}",
                images.len()
            )));
        }
        if images.len() / per != labels.len() {
            return Err(Error::CountMismatch {
                images: images.len() / per,
                labels: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= num_classes) {
            return Err(Error::LabelOutOfRange {
                label: bad,
                classes: num_classes,
            });
        }
        if images.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::ShapeMismatch("pixel values must lie in [0, 1]".into()));
        }
        Ok(LabeledDataset {
            name: name.into(),
            images,
            image_shape,
            labels,
            num_classes,
            label_kind,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn pixels_per_image(&self) -> usize {
        self.image_shape.iter().product()
    }

    pub fn image(&self, i: usize) -> &[f32] {
        let per = self.pixels_per_image();
        &self.images[i * per..(i + 1) * per]
    }

    /// `(N, C, H, W)` tensor of the selected images.
    pub fn batch_tensor(&self, indices: &[usize]) -> Tensor {
        let per = self.pixels_per_image();
        let mut data = Vec::with_capacity(indices.len() * per);
        for &i in indices {
            data.extend(self.image(i).iter().map(|&p| p as f64));
        }
        let [c, h, w] = self.image_shape;
        Tensor::new(vec![indices.len(), c, h, w], data).expect("sizes agree")
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        let mut images = Vec::with_capacity(indices.len() * self.pixels_per_image());
        for &i in indices {
            images.extend_from_slice(self.image(i));
        }
        LabeledDataset {
            name: self.name.clone(),
            images,
            image_shape: self.image_shape,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
            label_kind: self.label_kind,
        }
    }

    pub fn with_labels(&self, labels: Vec<usize>, kind: LabelKind) -> Result<LabeledDataset> {
        if labels.len() != self.len() {
            return Err(Error::CountMismatch {
                images: self.len(),
                labels: labels.len(),
            });
        }
        LabeledDataset::new(
            self.name.clone(),
            self.images.clone(),
            self.image_shape,
            labels,
            self.num_classes,
            kind,
        )
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Keeps only instances whose label is listed in `classes` and remaps
    /// `classes[k]` to label `k`.
    pub fn select_classes(&self, classes: &[usize]) -> Result<LabeledDataset> {
        if classes.is_empty() {
            return Err(Error::ConfigInvalid("class list is empty".into()));
        }
        for (k, &c) in classes.iter().enumerate() {
            if c >= self.num_classes {
                return Err(Error::LabelOutOfRange {
                    label: c,
                    classes: self.num_classes,
                });
            }
            if classes[..k].contains(&c) {
                return Err(Error::ConfigInvalid(format!("class {c} listed twice")));
            }
        }
        let keep: Vec<usize> = (0..self.len()).filter(|&i| classes.contains(&self.labels[i])).collect();
        let mut out = self.subset(&keep);
        out.labels = out
            .labels
            .iter()
            .map(|y| classes.iter().position(|c| c == y).expect("filtered"))
            .collect();
        out.num_classes = classes.len();
        Ok(out)
    }
}

fn read_be_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::TruncatedFile(format!("{what}: header ends at byte {}", bytes.len())))
}

/// Parses an IDX3 unsigned-byte image file into `(count, rows, cols, pixels)`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, usize, Vec<u8>)> {
    let magic = read_be_u32(bytes, 0, "image file")?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(Error::BadMagic {
            expected: IDX_IMAGE_MAGIC,
            found: magic,
        });
    }
    let n = read_be_u32(bytes, 4, "image file")? as usize;
    let rows = read_be_u32(bytes, 8, "image file")? as usize;
    let cols = read_be_u32(bytes, 12, "image file")? as usize;
    let need = n * rows * cols;
    let body = &bytes[16..];
    if body.len() < need {
        return Err(Error::TruncatedFile(format!(
            "image file: expected {need} pixel bytes, found {}",
            body.len()
        )));
    }
    Ok((n, rows, cols, body[..need].to_vec()))
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = read_be_u32(bytes, 0, "label file")?;
    if magic != IDX_LABEL_MAGIC {
        return Err(Error::BadMagic {
            expected: IDX_LABEL_MAGIC,
            found: magic,
        });
    }
    let n = read_be_u32(bytes, 4, "label file")? as usize;
    let body = &bytes[8..];
    if body.len() < n {
        return Err(Error::TruncatedFile(format!(
            "label file: expected {n} labels, found {}",
            body.len()
        )));
    }
    Ok(body[..n].to_vec())
}

pub fn encode_idx_images(rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    let n = pixels.len() / (rows * cols).max(1);
    let mut out = Vec::with_capacity(16 + pixels.len());
    for v in [IDX_IMAGE_MAGIC, n as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn class_count(labels: &[usize]) -> usize {
    labels.iter().max().map_or(1, |m| m + 1)
}

/// Loads an IDX image/label file pair. Pixels are scaled by 1/255.
pub fn load_idx(image_path: impl AsRef<Path>, label_path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let (n, rows, cols, pixels) = parse_idx_images(&read_file(image_path.as_ref())?)?;
    let labels: Vec<usize> = parse_idx_labels(&read_file(label_path.as_ref())?)?
        .into_iter()
        .map(usize::from)
        .collect();
    if labels.len() != n {
        return Err(Error::CountMismatch {
            images: n,
            labels: labels.len(),
        });
    }
    let name = image_path
        .as_ref()
        .file_stem()
        .map_or_else(|| "idx".to_string(), |s| s.to_string_lossy().into_owned());
    LabeledDataset::new(
        name,
        pixels.iter().map(|&b| b as f32 / 255.0).collect(),
        [1, rows, cols],
        labels.clone(),
        class_count(&labels),
        LabelKind::Clean,
    )
}

/// Loads CIFAR binary batches: each record is one label byte followed by
/// 3072 pixel bytes (red, green, blue planes of 32x32).
pub fn load_cifar(paths: &[impl AsRef<Path>]) -> Result<LabeledDataset> {
    let record = 1 + CIFAR_IMAGE_BYTES;
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for path in paths {
        let bytes = read_file(path.as_ref())?;
        if bytes.len() % record != 0 {
            return Err(Error::TruncatedFile(format!(
                "{}: {} bytes is not a whole number of {record}-byte records",
                path.as_ref().display(),
                bytes.len()
            )));
        }
        for rec in bytes.chunks_exact(record) {
            labels.push(rec[0] as usize);
            images.extend(rec[1..].iter().map(|&b| b as f32 / 255.0));
        }
    }
    LabeledDataset::new(
        "cifar",
        images,
        [3, 32, 32],
        labels.clone(),
        class_count(&labels),
        LabelKind::Clean,
    )
}

/// One integer label per line.
pub fn parse_label_csv(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            l.parse::<usize>()
                .map_err(|_| Error::Parse(format!("label line {}: {l:?} is not a class index", i + 1)))
        })
        .collect()
}

pub fn read_label_csv(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_label_csv(&text)
}

pub fn write_label_csv(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::with_capacity(labels.len() * 2);
    for y in labels {
        text.push_str(&y.to_string());
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parameters of the Gaussian-blob image generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub num_classes: usize,
    pub per_class: usize,
    pub height: usize,
    pub width: usize,
    /// Larger values mean less pixel noise and positional jitter.
    pub separation: f64,
    pub seed: u64,
}

/// Single-channel images: class `c` is a Gaussian blob centred on row
/// `h·(c+1)/(C+1)` of the middle column (mirror-symmetric, so horizontal
/// flips preserve the class), jittered by up to `2/separation` pixels, plus
/// pixel noise with standard deviation `0.3/separation`. Labels cycle
/// `0, 1, .., C-1` so every class gets exactly `per_class` instances.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    if !(spec.separation > 0.0) {
        return Err(Error::ConfigInvalid(format!(
            "separation {} must be positive",
            spec.separation
        )));
    }
    if spec.num_classes == 0 || spec.height == 0 || spec.width == 0 {
        return Err(Error::ConfigInvalid(
            "synthetic dataset needs classes and a non-empty image".into(),
        ));
    }
    let (c, h, w) = (spec.num_classes, spec.height, spec.width);
    let n = c * spec.per_class;
    let sigma = h.min(w) as f64 / 6.0;
    let noise_std = 0.3 / spec.separation;
    let jitter = 2.0 / spec.separation;
    let base = derive_seed(spec.seed, stream::SYNTHETIC);

    let mut images = Vec::with_capacity(n * h * w);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = i % c;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(base, i as u64));
        let cy = h as f64 * (y + 1) as f64 / (c + 1) as f64 + rng.gen_range(-1.0..=1.0) * jitter;
        let cx = (w as f64 - 1.0) / 2.0;
        for r in 0..h {
            for col in 0..w {
                let d2 = (r as f64 - cy).powi(2) + (col as f64 - cx).powi(2);
                let blob = (-d2 / (2.0 * sigma * sigma)).exp();
                let z: f64 = rng.sample(StandardNormal);
                images.push((0.1 + 0.7 * blob + noise_std * z).clamp(0.0, 1.0) as f32);
            }
        }
        labels.push(y);
    }
    LabeledDataset::new(
        format!("synthetic-c{c}-s{}", spec.separation),
        images,
        [1, h, w],
        labels,
        c,
        LabelKind::Clean,
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitPlan {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub seed: u64,
}

/// Stratified random split: each class contributes
/// `round(fraction · class size)` instances to validation.
pub fn split(dataset: &LabeledDataset, validation_fraction: f64, seed: u64) -> Result<SplitPlan> {
    if !(validation_fraction > 0.0 && validation_fraction < 1.0) {
        return Err(Error::FractionOutOfRange(validation_fraction));
    }
    let mut train = Vec::new();
    let mut validation = Vec::new();
    for class in 0..dataset.num_classes {
        let mut members: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.labels[i] == class).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(derive_seed(seed, stream::SPLIT), class as u64));
        members.shuffle(&mut rng);
        let n_val = (validation_fraction * members.len() as f64).round() as usize;
        validation.extend_from_slice(&members[..n_val]);
        train.extend_from_slice(&members[n_val..]);
    }
    train.sort_unstable();
    validation.sort_unstable();
    Ok(SplitPlan {
        train,
        validation,
        seed,
    })
}

/// Nearest-neighbour resampling: output pixel `(r, c)` copies input pixel
/// `(⌊r·H/h⌋, ⌊c·W/w⌋)`.
pub fn resize(dataset: &LabeledDataset, height: usize, width: usize) -> Result<LabeledDataset> {
    if height == 0 || width == 0 {
        return Err(Error::ConfigInvalid("resize target must be at least 1x1".into()));
    }
    let [ch, h, w] = dataset.image_shape;
    if (h, w) == (height, width) {
        return Ok(dataset.clone());
    }
    let row_map: Vec<usize> = (0..height).map(|r| r * h / height).collect();
    let col_map: Vec<usize> = (0..width).map(|c| c * w / width).collect();
    let mut images = Vec::with_capacity(dataset.len() * ch * height * width);
    for i in 0..dataset.len() {
        let img = dataset.image(i);
        for plane in img.chunks(h * w) {
            for &r in &row_map {
                for &c in &col_map {
                    images.push(plane[r * w + c]);
                }
            }
        }
    }
    Ok(LabeledDataset {
        images,
        image_shape: [ch, height, width],
        ..dataset.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn fixture() -> (Vec<u8>, Vec<u8>) {
        let pixels: Vec<u8> = vec![0, 51, 102, 255, 10, 20, 30, 40, 200, 100, 50, 0, 1, 2, 3, 4];
        (encode_idx_images(2, 2, &pixels), encode_idx_labels(&[0, 1, 2, 1]))
    }

    #[test]
    fn load_hand_written_idx_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lbl) = fixture();
        std::fs::write(dir.path().join("img.idx"), &img).unwrap();
        std::fs::write(dir.path().join("lbl.idx"), &lbl).unwrap();
        let ds = load_idx(dir.path().join("img.idx"), dir.path().join("lbl.idx")).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.image_shape, [1, 2, 2]);
        assert_eq!(ds.image(0)[0], 0.0);
        assert_eq!(ds.image(0)[1], 51.0 / 255.0);
        assert_eq!(ds.image(0)[3], 1.0);
        assert_eq!(ds.labels, vec![0, 1, 2, 1]);
        assert_eq!(ds.num_classes, 3);
    }

    #[test]
    fn idx_errors() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lbl) = fixture();
        std::fs::write(dir.path().join("lbl.idx"), &lbl).unwrap();
        assert!(matches!(
            load_idx(dir.path().join("lbl.idx"), dir.path().join("lbl.idx")),
            Err(Error::BadMagic {
                expected: IDX_IMAGE_MAGIC,
                found: IDX_LABEL_MAGIC
            })
        ));

        let ten = encode_idx_images(2, 2, &[7u8; 40]);
        let nine = encode_idx_labels(&[0u8; 9]);
        std::fs::write(dir.path().join("ten.idx"), ten).unwrap();
        std::fs::write(dir.path().join("nine.idx"), nine).unwrap();
        assert!(matches!(
            load_idx(dir.path().join("ten.idx"), dir.path().join("nine.idx")),
            Err(Error::CountMismatch { images: 10, labels: 9 })
        ));

        assert!(matches!(
            parse_idx_images(&img[..img.len() - 1]),
            Err(Error::TruncatedFile(_))
        ));
        assert!(matches!(parse_idx_images(&img[..6]), Err(Error::TruncatedFile(_))));
    }

    #[test]
    fn cifar_records() {
        let dir = tempfile::tempdir().unwrap();
        let mut bytes = Vec::new();
        for label in [3u8, 7] {
            bytes.push(label);
            bytes.extend(std::iter::repeat_n(label * 10, CIFAR_IMAGE_BYTES));
        }
        std::fs::write(dir.path().join("b.bin"), &bytes).unwrap();
        let ds = load_cifar(&[dir.path().join("b.bin")]).unwrap();
        assert_eq!(ds.labels, vec![3, 7]);
        assert_eq!(ds.image_shape, [3, 32, 32]);
        assert_eq!(ds.image(1)[0], 70.0 / 255.0);

        std::fs::write(dir.path().join("short.bin"), &bytes[..100]).unwrap();
        assert!(matches!(
            load_cifar(&[dir.path().join("short.bin")]),
            Err(Error::TruncatedFile(_))
        ));
    }

    #[test]
    fn label_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels.csv");
        write_label_csv(&p, &[2, 0, 1]).unwrap();
        assert_eq!(read_label_csv(&p).unwrap(), vec![2, 0, 1]);
        assert!(matches!(parse_label_csv("1\nx\n"), Err(Error::Parse(_))));
    }

    fn spec(seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            num_classes: 3,
            per_class: 600,
            height: 28,
            width: 28,
            separation: 1.0,
            seed,
        }
    }

    #[test]
    fn synthetic_construction() {
        let ds = generate_synthetic(&spec(1)).unwrap();
        assert_eq!(ds.len(), 1800);
        assert_eq!(ds.class_counts(), vec![600, 600, 600]);
        assert_eq!(ds.image_shape, [1, 28, 28]);
        assert_eq!(ds, generate_synthetic(&spec(1)).unwrap());
        assert_ne!(ds.images, generate_synthetic(&spec(2)).unwrap().images);
        assert!(generate_synthetic(&SyntheticSpec {
            separation: 0.0,
            ..spec(1)
        })
        .is_err());
    }

    #[test]
    fn split_examples() {
        let ds = generate_synthetic(&spec(1)).unwrap();
        let plan = split(&ds, 0.2, 5).unwrap();
        assert_eq!(plan.train.len(), 1440);
        assert_eq!(plan.validation.len(), 360);
        for class in 0..3 {
            assert_eq!(plan.validation.iter().filter(|&&i| ds.labels[i] == class).count(), 120);
        }
        let other = split(&ds, 0.2, 6).unwrap();
        assert_ne!(plan.validation, other.validation);
        assert_eq!(other.validation.len(), 360);
        assert_eq!(plan, split(&ds, 0.2, 5).unwrap());
        assert!(matches!(split(&ds, 1.5, 0), Err(Error::FractionOutOfRange(_))));
        assert!(matches!(split(&ds, 0.0, 0), Err(Error::FractionOutOfRange(_))));
    }

    #[test]
    fn resize_examples() {
        let ds = generate_synthetic(&SyntheticSpec {
            per_class: 2,
            ..spec(1)
        })
        .unwrap();
        let big = resize(&ds, 32, 32).unwrap();
        assert_eq!(big.image_shape, [1, 32, 32]);
        assert_eq!(big.images.len(), 6 * 32 * 32);
        assert_eq!(resize(&ds, 28, 28).unwrap(), ds);

        let checker =
            LabeledDataset::new("c", vec![0.0, 1.0, 1.0, 0.0], [1, 2, 2], vec![0], 1, LabelKind::Clean).unwrap();
        let out = resize(&checker, 4, 4).unwrap();
        #[rustfmt::skip]
        let expected = vec![
            0.0, 0.0, 1.0, 1.0,
            0.0, 0.0, 1.0, 1.0,
            1.0, 1.0, 0.0, 0.0,
            1.0, 1.0, 0.0, 0.0,
        ];
        assert_eq!(out.images, expected);
    }

    #[test]
    fn class_selection_remaps_labels() {
        let ds = LabeledDataset::new("d", vec![0.5; 5], [1, 1, 1], vec![0, 4, 2, 9, 4], 10, LabelKind::Clean).unwrap();
        let sub = ds.select_classes(&[4, 9, 0]).unwrap();
        assert_eq!(sub.labels, vec![2, 0, 1, 0]);
        assert_eq!(sub.num_classes, 3);
        assert!(ds.select_classes(&[1, 1]).is_err());
    }

    proptest! {
        #[test]
        fn idx_round_trip(rows in 1usize..5, cols in 1usize..5, n in 0usize..6, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pixels: Vec<u8> = (0..rows * cols * n).map(|_| rng.gen()).collect();
            let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..10)).collect();
            let img = encode_idx_images(rows, cols, &pixels);
            let lbl = encode_idx_labels(&labels);
            let (pn, pr, pc, px) = parse_idx_images(&img).unwrap();
            prop_assert_eq!((pn, pr, pc), (n, rows, cols));
            prop_assert_eq!(encode_idx_images(pr, pc, &px), img);
            prop_assert_eq!(encode_idx_labels(&parse_idx_labels(&lbl).unwrap()), lbl);
        }

        #[test]
        fn split_is_stratified(per_class in proptest::collection::vec(1usize..40, 1..4), frac in 0.05f64..0.95, seed in any::<u64>()) {
            let mut labels = Vec::new();
            for (c, &k) in per_class.iter().enumerate() {
                labels.extend(std::iter::repeat_n(c, k));
            }
            let n = labels.len();
            let ds = LabeledDataset::new("p", vec![0.0; n], [1, 1, 1], labels, per_class.len(), LabelKind::Clean).unwrap();
            let plan = split(&ds, frac, seed).unwrap();
            prop_assert_eq!(plan.train.len() + plan.validation.len(), n);
            for (c, &k) in per_class.iter().enumerate() {
                let v = plan.validation.iter().filter(|&&i| ds.labels[i] == c).count() as f64;
                prop_assert!((v - frac * k as f64).abs() <= 1.0);
            }
            let mut all: Vec<usize> = plan.train.iter().chain(&plan.validation).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }
}
