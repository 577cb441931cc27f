//! Generator networks loaded from a JSON manifest and a float32 blob.
//!
//! The manifest lists layers in forward order. Parameters are stored in the
//! blob back to back, in manifest order, row-major little-endian float32:
//!
//! * `dense`: weight `[out, in]`, bias `[out]`; the output is reshaped to `out_shape`
//! * `conv_transpose`: weight `[in_ch, out_ch, k, k]`, bias `[out_ch]`
//! * `batch_norm`: gamma, beta, running mean, running variance, each `[channels]`
//! * `relu`, `tanh`: no parameters

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{crop_argmax, DecoderError, SegmentDecoder, OUTPUT_SIDE};
use crate::corpus::{decode_f32, encode_f32};
use crate::grid::SegmentGrid;
use crate::Game;

pub const MANIFEST_FORMAT: &str = "levelgen-generator";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Dense {
        in_features: usize,
        out_features: usize,
        out_shape: [usize; 3],
    },
    ConvTranspose {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },
    BatchNorm {
        channels: usize,
        eps: f64,
    },
    Relu,
    Tanh,
}

impl LayerSpec {
    fn param_count(&self) -> usize {
        match *self {
            LayerSpec::Dense {
                in_features,
                out_features,
                ..
            } => out_features * in_features + out_features,
            LayerSpec::ConvTranspose {
                in_channels,
                out_channels,
                kernel,
                ..
            } => in_channels * out_channels * kernel * kernel + out_channels,
            LayerSpec::BatchNorm { channels, .. } => 4 * channels,
            LayerSpec::Relu | LayerSpec::Tanh => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub format: String,
    pub version: u32,
    pub game: Game,
    pub dtype: String,
    pub byte_order: String,
    pub latent_size: usize,
    /// (channels, height, width) of the raw output.
    pub output_shape: [usize; 3],
    /// (channels, height, width) of the region read as a segment.
    pub crop: [usize; 3],
    /// Blob file name, relative to the manifest.
    pub blob: String,
    pub layers: Vec<LayerSpec>,
}

/// Dense (C, H, W) activations.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn from_vec(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == channels * height * width).then_some(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, c: usize, r: usize, col: usize) -> f64 {
        self.data[(c * self.height + r) * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, c: usize, r: usize, col: usize, v: f64) {
        self.data[(c * self.height + r) * self.width + col] = v;
    }
}

/// `weight` is `[out, in]` row-major.
pub fn dense(input: &[f64], weight: &[f64], bias: &[f64]) -> Vec<f64> {
    let n_in = input.len();
    bias.iter()
        .enumerate()
        .map(|(o, b)| {
            b + weight[o * n_in..(o + 1) * n_in]
                .iter()
                .zip(input)
                .map(|(w, x)| w * x)
                .sum::<f64>()
        })
        .collect()
}

/// Transposed 2-D convolution, `weight` laid out `[in_ch, out_ch, k, k]`.
/// Output side is `(in − 1)·stride − 2·padding + kernel`.
pub fn conv_transpose2d(
    input: &Tensor3,
    weight: &[f64],
    bias: &[f64],
    out_channels: usize,
    kernel: usize,
    stride: usize,
    padding: usize,
) -> Tensor3 {
    let (cin, h, w) = input.shape();
    let oh = (h - 1) * stride + kernel - 2 * padding;
    let ow = (w - 1) * stride + kernel - 2 * padding;
    let mut out = Tensor3::zeros(out_channels, oh, ow);
    for co in 0..out_channels {
        out.data[co * oh * ow..(co + 1) * oh * ow].fill(bias[co]);
    }
    for ci in 0..cin {
        for co in 0..out_channels {
            let kbase = (ci * out_channels + co) * kernel * kernel;
            let kern = &weight[kbase..kbase + kernel * kernel];
            let plane = &mut out.data[co * oh * ow..(co + 1) * oh * ow];
            for ih in 0..h {
                for iw in 0..w {
                    let x = input.get(ci, ih, iw);
                    if x == 0.0 {
                        continue;
                    }
                    for kh in 0..kernel {
                        let Some(r) = (ih * stride + kh).checked_sub(padding).filter(|&r| r < oh) else {
                            continue;
                        };
                        for kw in 0..kernel {
                            let Some(c) = (iw * stride + kw).checked_sub(padding).filter(|&c| c < ow) else {
                                continue;
                            };
                            plane[r * ow + c] += x * kern[kh * kernel + kw];
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Layer {
    Dense { weight: Vec<f64>, bias: Vec<f64>, out_shape: [usize; 3] },
    ConvTranspose { weight: Vec<f64>, bias: Vec<f64>, out_channels: usize, kernel: usize, stride: usize, padding: usize },
    BatchNorm { scale: Vec<f64>, shift: Vec<f64> },
    Relu,
    Tanh,
}

#[derive(Debug, Clone)]
enum Activations {
    Flat(Vec<f64>),
    Spatial(Tensor3),
}

/// A loaded generator. Immutable; decoding is reentrant.
#[derive(Debug, Clone)]
pub struct GeneratorModel {
    manifest: ModelManifest,
    /// Raw float32 parameters in manifest order.
    params: Vec<f32>,
    layers: Vec<Layer>,
}

impl GeneratorModel {
    /// Validate the shape chain and bind parameters.
    pub fn from_parts(manifest: ModelManifest, params: Vec<f32>) -> Result<Self, DecoderError> {
        if manifest.format != MANIFEST_FORMAT {
            return Err(DecoderError::BadFormat(format!("unknown format {:?}", manifest.format)));
        }
        if manifest.dtype != "float32" || manifest.byte_order != "little" {
            return Err(DecoderError::BadFormat(format!(
                "unsupported dtype/byte order {}/{}",
                manifest.dtype, manifest.byte_order
            )));
        }
        let needed: usize = manifest.layers.iter().map(LayerSpec::param_count).sum();
        if params.len() != needed {
            return Err(DecoderError::BadFormat(format!(
                "blob holds {} parameters, layers need {needed}",
                params.len()
            )));
        }
        validate_chain(&manifest)?;
        let mut offset = 0;
        let mut take = |n: usize| {
            let s: Vec<f64> = params[offset..offset + n].iter().map(|&v| f64::from(v)).collect();
            offset += n;
            s
        };
        let mut layers = Vec::with_capacity(manifest.layers.len());
        for spec in &manifest.layers {
            layers.push(match *spec {
                LayerSpec::Dense {
                    in_features,
                    out_features,
                    out_shape,
                } => Layer::Dense {
                    weight: take(in_features * out_features),
                    bias: take(out_features),
                    out_shape,
                },
                LayerSpec::ConvTranspose {
                    in_channels,
                    out_channels,
                    kernel,
                    stride,
                    padding,
                } => Layer::ConvTranspose {
                    weight: take(in_channels * out_channels * kernel * kernel),
                    bias: take(out_channels),
                    out_channels,
                    kernel,
                    stride,
                    padding,
                },
                LayerSpec::BatchNorm { channels, eps } => {
                    let gamma = take(channels);
                    let beta = take(channels);
                    let mean = take(channels);
                    let var = take(channels);
                    let scale: Vec<f64> = gamma.iter().zip(&var).map(|(g, v)| g / (v + eps).sqrt()).collect();
                    let shift = beta.iter().zip(&mean).zip(&scale).map(|((b, m), s)| b - m * s).collect();
                    Layer::BatchNorm { scale, shift }
                }
                LayerSpec::Relu => Layer::Relu,
                LayerSpec::Tanh => Layer::Tanh,
            });
        }
        Ok(Self {
            manifest,
            params,
            layers,
        })
    }

    /// Load `manifest.json`; the blob is resolved relative to it.
    pub fn load(manifest_path: &Path) -> Result<Self, DecoderError> {
        let text = std::fs::read_to_string(manifest_path)?;
        let manifest: ModelManifest =
            serde_json::from_str(&text).map_err(|e| DecoderError::BadFormat(format!("manifest: {e}")))?;
        let blob_path = blob_path(manifest_path, &manifest.blob);
        let bytes = std::fs::read(&blob_path)?;
        let params = decode_f32(&bytes)
            .ok_or_else(|| DecoderError::BadFormat(format!("{} is not whole float32 values", blob_path.display())))?;
        Self::from_parts(manifest, params)
    }

    /// Write manifest and blob; the blob goes next to the manifest.
    pub fn save(&self, manifest_path: &Path) -> Result<(), DecoderError> {
        std::fs::write(blob_path(manifest_path, &self.manifest.blob), encode_f32(&self.params))?;
        std::fs::write(
            manifest_path,
            serde_json::to_string_pretty(&self.manifest).expect("manifest serializes"),
        )?;
        Ok(())
    }

    pub fn manifest(&self) -> &ModelManifest {
        &self.manifest
    }

    pub fn params(&self) -> &[f32] {
        &self.params
    }

    /// Raw (K, 32, 32) scores for `z`.
    pub fn forward(&self, z: &[f64]) -> Result<Tensor3, DecoderError> {
        if z.len() != self.manifest.latent_size {
            return Err(DecoderError::LatentSizeMismatch {
                expected: self.manifest.latent_size,
                actual: z.len(),
            });
        }
        let mut act = Activations::Flat(z.to_vec());
        for layer in &self.layers {
            act = match (layer, act) {
                (Layer::Dense { weight, bias, out_shape }, Activations::Flat(x)) => {
                    let y = dense(&x, weight, bias);
                    Activations::Spatial(Tensor3::from_vec(out_shape[0], out_shape[1], out_shape[2], y).expect("validated"))
                }
                (
                    Layer::ConvTranspose {
                        weight,
                        bias,
                        out_channels,
                        kernel,
                        stride,
                        padding,
                    },
                    Activations::Spatial(x),
                ) => Activations::Spatial(conv_transpose2d(&x, weight, bias, *out_channels, *kernel, *stride, *padding)),
                (Layer::BatchNorm { scale, shift }, Activations::Spatial(mut x)) => {
                    let plane = x.height * x.width;
                    for (c, chunk) in x.data.chunks_mut(plane).enumerate() {
                        for v in chunk {
                            *v = *v * scale[c] + shift[c];
                        }
                    }
                    Activations::Spatial(x)
                }
                (Layer::Relu, a) => map_activations(a, |v| v.max(0.0)),
                (Layer::Tanh, a) => map_activations(a, f64::tanh),
                _ => unreachable!("shape chain validated at load"),
            };
        }
        match act {
            Activations::Spatial(t) => Ok(t),
            Activations::Flat(_) => unreachable!("validated output is spatial"),
        }
    }
}

fn map_activations(a: Activations, f: impl Fn(f64) -> f64) -> Activations {
    match a {
        Activations::Flat(mut v) => {
            v.iter_mut().for_each(|x| *x = f(*x));
            Activations::Flat(v)
        }
        Activations::Spatial(mut t) => {
            t.data.iter_mut().for_each(|x| *x = f(*x));
            Activations::Spatial(t)
        }
    }
}

fn blob_path(manifest_path: &Path, blob: &str) -> PathBuf {
    manifest_path.parent().unwrap_or_else(|| Path::new(".")).join(blob)
}

fn validate_chain(m: &ModelManifest) -> Result<(), DecoderError> {
    let broken = |layer: usize, message: String| Err(DecoderError::ShapeChainBroken { layer, message });
    // None while flat, with the flat length tracked separately.
    let mut flat = Some(m.latent_size);
    let mut spatial: Option<[usize; 3]> = None;
    for (i, spec) in m.layers.iter().enumerate() {
        match *spec {
            LayerSpec::Dense {
                in_features,
                out_features,
                out_shape,
            } => {
                if flat != Some(in_features) {
                    return broken(i, format!("dense expects {in_features} flat inputs, got {flat:?} / {spatial:?}"));
                }
                if out_shape.iter().product::<usize>() != out_features {
                    return broken(i, format!("out_shape {out_shape:?} does not hold {out_features} values"));
                }
                flat = None;
                spatial = Some(out_shape);
            }
            LayerSpec::ConvTranspose {
                in_channels,
                out_channels,
                kernel,
                stride,
                padding,
            } => {
                let Some([c, h, w]) = spatial else {
                    return broken(i, "transposed convolution needs a spatial input".into());
                };
                if c != in_channels {
                    return broken(i, format!("expects {in_channels} channels, got {c}"));
                }
                if stride == 0 || kernel == 0 || (h.min(w) - 1) * stride + kernel <= 2 * padding {
                    return broken(i, "degenerate kernel/stride/padding".into());
                }
                spatial = Some([
                    out_channels,
                    (h - 1) * stride + kernel - 2 * padding,
                    (w - 1) * stride + kernel - 2 * padding,
                ]);
            }
            LayerSpec::BatchNorm { channels, eps } => match spatial {
                Some([c, ..]) if c == channels && eps >= 0.0 => {}
                _ => return broken(i, format!("batch norm over {channels} channels does not match {spatial:?}")),
            },
            LayerSpec::Relu | LayerSpec::Tanh => {}
        }
    }
    let Some(out) = spatial else {
        return broken(m.layers.len(), "network never produces a spatial output".into());
    };
    if out != m.output_shape {
        return broken(m.layers.len(), format!("produces {out:?}, manifest declares {:?}", m.output_shape));
    }
    if out[1] != OUTPUT_SIDE || out[2] != OUTPUT_SIDE {
        return broken(m.layers.len(), format!("output must be {OUTPUT_SIDE}x{OUTPUT_SIDE}, got {out:?}"));
    }
    let [kc, kh, kw] = m.crop;
    if kc != out[0] || kh > out[1] || kw > out[2] {
        return broken(m.layers.len(), format!("crop {:?} does not fit output {out:?}", m.crop));
    }
    Ok(())
}

impl SegmentDecoder for GeneratorModel {
    fn game(&self) -> Game {
        self.manifest.game
    }

    fn latent_size(&self) -> usize {
        self.manifest.latent_size
    }

    fn channels(&self) -> usize {
        self.manifest.output_shape[0]
    }

    fn segment_shape(&self) -> (usize, usize) {
        (self.manifest.crop[1], self.manifest.crop[2])
    }

    fn decode(&self, z: &[f64]) -> Result<SegmentGrid, DecoderError> {
        let scores = self.forward(z)?;
        Ok(crop_argmax(&scores, self.manifest.crop[1], self.manifest.crop[2]))
    }
}

/// Manifest for the usual generator ladder: dense Z → C·4·4, transposed
/// convolutions 4 → 8 → 16 → 32 with batch norm and ReLU, and a final
/// stride-1 transposed convolution down to the tile channels.
pub fn dcgan_manifest(game: Game, base_channels: usize) -> ModelManifest {
    let (latent, k, crop_h, crop_w) = match game {
        Game::Zelda => (10, 3, 11, 16),
        Game::Mario => (30, 13, 14, 28),
    };
    let c = base_channels;
    let mut layers = vec![
        LayerSpec::Dense {
            in_features: latent,
            out_features: c * 16,
            out_shape: [c, 4, 4],
        },
        LayerSpec::BatchNorm { channels: c, eps: 1e-5 },
        LayerSpec::Relu,
    ];
    let mut ch = c;
    for _ in 0..3 {
        layers.push(LayerSpec::ConvTranspose {
            in_channels: ch,
            out_channels: ch / 2,
            kernel: 4,
            stride: 2,
            padding: 1,
        });
        ch /= 2;
        layers.push(LayerSpec::BatchNorm { channels: ch, eps: 1e-5 });
        layers.push(LayerSpec::Relu);
    }
    layers.push(LayerSpec::ConvTranspose {
        in_channels: ch,
        out_channels: k,
        kernel: 3,
        stride: 1,
        padding: 1,
    });
    ModelManifest {
        format: MANIFEST_FORMAT.into(),
        version: 1,
        game,
        dtype: "float32".into(),
        byte_order: "little".into(),
        latent_size: latent,
        output_shape: [k, OUTPUT_SIDE, OUTPUT_SIDE],
        crop: [k, crop_h, crop_w],
        blob: "generator.bin".into(),
        layers,
    }
}

impl GeneratorModel {
    /// Model with seeded random weights, for tests and benchmarks.
    pub fn with_random_weights(manifest: ModelManifest, seed: u64) -> Result<Self, DecoderError> {
        use rand::Rng;
        let mut rng = crate::rng::seeded(seed);
        let mut params = Vec::new();
        for spec in &manifest.layers {
            match *spec {
                LayerSpec::BatchNorm { channels, .. } => {
                    params.extend((0..channels).map(|_| rng.random_range(0.5f32..1.5)));
                    params.extend((0..channels).map(|_| rng.random_range(-0.1f32..0.1)));
                    params.extend((0..channels).map(|_| rng.random_range(-0.1f32..0.1)));
                    params.extend((0..channels).map(|_| rng.random_range(0.5f32..1.5)));
                }
                ref other => {
                    let fan = match *other {
                        LayerSpec::Dense { in_features, .. } => in_features,
                        LayerSpec::ConvTranspose { in_channels, kernel, .. } => in_channels * kernel,
                        _ => 1,
                    } as f32;
                    let bound = 1.0 / fan.sqrt();
                    params.extend((0..other.param_count()).map(|_| rng.random_range(-bound..bound)));
                }
            }
        }
        Self::from_parts(manifest, params)
    }
}

/// A latent and the raw scores an exporter computed for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardFixture {
    pub z: Vec<f64>,
    /// (K, 32, 32) scores, flattened row-major.
    pub scores: Vec<f64>,
}

pub fn read_fixtures(path: &Path) -> Result<Vec<ForwardFixture>, DecoderError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| DecoderError::BadFormat(format!("fixtures: {e}")))
}

impl GeneratorModel {
    /// Largest absolute score difference between this model and `fixtures`.
    pub fn fixture_error(&self, fixtures: &[ForwardFixture]) -> Result<f64, DecoderError> {
        let mut worst: f64 = 0.0;
        for (i, f) in fixtures.iter().enumerate() {
            let out = self.forward(&f.z)?;
            if out.data().len() != f.scores.len() {
                return Err(DecoderError::BadFormat(format!(
                    "fixture {i} has {} scores, model produces {}",
                    f.scores.len(),
                    out.data().len()
                )));
            }
            for (a, b) in out.data().iter().zip(&f.scores) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(worst)
    }
}
