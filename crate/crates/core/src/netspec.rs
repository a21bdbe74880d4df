//! Layer graph of the two-branch encoder/decoder network, with shape
//! propagation and parameter counting. No weights, no forward pass.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Encoder block widths.
pub const ENCODER_WIDTHS: [usize; 5] = [64, 128, 256, 512, 512];
/// Decoder block widths, deepest first.
pub const DECODER_WIDTHS: [usize; 5] = [512, 512, 256, 128, 64];
pub const DEFAULT_DENSE_LAYERS: [usize; 5] = [8, 8, 8, 4, 4];
pub const DEFAULT_GROWTH: usize = 32;
/// Five 2× pooling stages.
pub const INPUT_DIVISOR: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorShape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl TensorShape {
    pub fn new(channels: usize, height: usize, width: usize) -> Self {
        Self { channels, height, width }
    }
}

impl fmt::Display for TensorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.channels, self.height, self.width)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerKind {
    /// Same-padded convolution.
    Conv { k: usize, out: usize, stride: usize },
    MaxPool { size: usize },
    /// Inverts the named pooling layer using its indices.
    MaxUnpool { size: usize, pool: String },
    /// `n_layers` 3×3 convolutions of `growth` channels, each fed the
    /// concatenation of the block input and all earlier outputs.
    DenseBlock { n_layers: usize, growth: usize },
    Softmax,
    Output { out: usize },
}

impl LayerKind {
    /// Trainable parameters given the input channel count.
    pub fn params(&self, in_ch: usize) -> u64 {
        match *self {
            LayerKind::Conv { k, out, .. } => conv_params(k, in_ch, out),
            LayerKind::DenseBlock { n_layers, growth } => {
                (0..n_layers).map(|j| conv_params(3, in_ch + j * growth, growth)).sum()
            }
            _ => 0,
        }
    }
}

fn conv_params(k: usize, in_ch: usize, out: usize) -> u64 {
    (k * k * in_ch * out + out) as u64
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerKind::Conv { k, out, stride } => write!(f, "conv{k}x{k}/{out} s{stride}"),
            LayerKind::MaxPool { size } => write!(f, "maxpool{size}"),
            LayerKind::MaxUnpool { size, pool } => write!(f, "maxunpool{size} <- {pool}"),
            LayerKind::DenseBlock { n_layers, growth } => write!(f, "dense{n_layers}x{growth}"),
            LayerKind::Softmax => write!(f, "softmax"),
            LayerKind::Output { out } => write!(f, "output/{out}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub name: String,
    pub kind: LayerKind,
}

impl LayerSpec {
    fn new(name: impl Into<String>, kind: LayerKind) -> Self {
        Self { name: name.into(), kind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetOptions {
    pub input_channels: usize,
    pub growth: usize,
    pub dense_layers: [usize; 5],
    /// Kernel of the instance head convolution: 1, or 2 for the literal
    /// 2×2 reading.
    pub inst_head_kernel: usize,
}

impl Default for NetOptions {
    fn default() -> Self {
        Self {
            input_channels: 3,
            growth: DEFAULT_GROWTH,
            dense_layers: DEFAULT_DENSE_LAYERS,
            inst_head_kernel: 1,
        }
    }
}

/// Shared encoder plus the instance and medial-axis decoder branches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetGraph {
    pub input_channels: usize,
    pub encoder: Vec<LayerSpec>,
    pub inst: Vec<LayerSpec>,
    pub top: Vec<LayerSpec>,
}

fn decoder(prefix: &str, opts: &NetOptions) -> Vec<LayerSpec> {
    let mut layers = Vec::new();
    for (i, &width) in DECODER_WIDTHS.iter().enumerate() {
        let b = i + 1;
        layers.push(LayerSpec::new(
            format!("{prefix}.dec{b}.dense"),
            LayerKind::DenseBlock {
                n_layers: opts.dense_layers[i],
                growth: opts.growth,
            },
        ));
        layers.push(LayerSpec::new(
            format!("{prefix}.dec{b}.conv"),
            LayerKind::Conv { k: 3, out: width, stride: 1 },
        ));
        layers.push(LayerSpec::new(
            format!("{prefix}.dec{b}.unpool"),
            LayerKind::MaxUnpool {
                size: 2,
                pool: format!("enc{}.pool", 5 - i),
            },
        ));
    }
    layers
}

pub fn build_tanet() -> NetGraph {
    build_tanet_with(&NetOptions::default()).expect("default options are valid")
}

pub fn build_tanet_with(opts: &NetOptions) -> Result<NetGraph> {
    if opts.input_channels == 0 {
        return Err(Error::invalid("input_channels", "must be positive"));
    }
    if opts.growth == 0 {
        return Err(Error::invalid("growth", "must be positive"));
    }
    if !matches!(opts.inst_head_kernel, 1 | 2) {
        return Err(Error::invalid(
            "inst_head_kernel",
            format!("{} must be 1 or 2", opts.inst_head_kernel),
        ));
    }

    let mut encoder = Vec::new();
    for (i, &width) in ENCODER_WIDTHS.iter().enumerate() {
        let b = i + 1;
        for j in 1..=3 {
            encoder.push(LayerSpec::new(
                format!("enc{b}.conv{j}"),
                LayerKind::Conv { k: 3, out: width, stride: 1 },
            ));
        }
        encoder.push(LayerSpec::new(format!("enc{b}.pool"), LayerKind::MaxPool { size: 2 }));
    }

    let mut inst = decoder("inst", opts);
    inst.push(LayerSpec::new(
        "inst.head.conv",
        LayerKind::Conv {
            k: opts.inst_head_kernel,
            out: 2,
            stride: 1,
        },
    ));
    inst.push(LayerSpec::new("inst.head.softmax", LayerKind::Softmax));
    inst.push(LayerSpec::new("inst.output", LayerKind::Output { out: 2 }));

    let mut top = decoder("top", opts);
    top.push(LayerSpec::new("top.head.conv", LayerKind::Conv { k: 1, out: 1, stride: 1 }));
    top.push(LayerSpec::new("top.output", LayerKind::Output { out: 1 }));

    Ok(NetGraph {
        input_channels: opts.input_channels,
        encoder,
        inst,
        top,
    })
}

/// One row of the layer table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerRow {
    pub name: String,
    pub kind: LayerKind,
    pub input: TensorShape,
    pub output: TensorShape,
    pub params: u64,
}

struct Propagator {
    pools: HashMap<String, TensorShape>,
    rows: Vec<LayerRow>,
}

impl Propagator {
    fn run(&mut self, layers: &[LayerSpec], mut shape: TensorShape, record: bool) -> Result<TensorShape> {
        for layer in layers {
            let input = shape;
            shape = match &layer.kind {
                LayerKind::Conv { k, out, stride } => {
                    if !(1..=3).contains(k) || *stride == 0 || *out == 0 {
                        return Err(bad_layer(layer, "kernel must be 1..=3, stride and width positive"));
                    }
                    if !shape.height.is_multiple_of(*stride) || !shape.width.is_multiple_of(*stride) {
                        return Err(bad_layer(layer, format!("stride {stride} does not divide {shape}")));
                    }
                    TensorShape::new(*out, shape.height / stride, shape.width / stride)
                }
                LayerKind::MaxPool { size } => {
                    if *size == 0 || !shape.height.is_multiple_of(*size) || !shape.width.is_multiple_of(*size) {
                        return Err(bad_layer(layer, format!("pool {size} does not divide {shape}")));
                    }
                    self.pools.insert(layer.name.clone(), shape);
                    TensorShape::new(shape.channels, shape.height / size, shape.width / size)
                }
                LayerKind::MaxUnpool { size, pool } => {
                    let before = *self
                        .pools
                        .get(pool)
                        .ok_or_else(|| bad_layer(layer, format!("no pooling layer `{pool}`")))?;
                    let expected = TensorShape::new(before.channels, before.height / size, before.width / size);
                    if shape != expected {
                        return Err(bad_layer(
                            layer,
                            format!("input {shape} does not match `{pool}` output {expected}"),
                        ));
                    }
                    before
                }
                LayerKind::DenseBlock { n_layers, growth } => {
                    TensorShape::new(shape.channels + n_layers * growth, shape.height, shape.width)
                }
                LayerKind::Softmax => shape,
                LayerKind::Output { out } => {
                    if shape.channels != *out {
                        return Err(bad_layer(layer, format!("expected {out} channels, got {shape}")));
                    }
                    shape
                }
            };
            if record {
                self.rows.push(LayerRow {
                    name: layer.name.clone(),
                    kind: layer.kind.clone(),
                    input,
                    output: shape,
                    params: layer.kind.params(input.channels),
                });
            }
        }
        Ok(shape)
    }
}

fn bad_layer(layer: &LayerSpec, reason: impl fmt::Display) -> Error {
    Error::invalid("graph", format!("layer `{}`: {reason}", layer.name))
}

fn propagate(g: &NetGraph, input: TensorShape) -> Result<(TensorShape, TensorShape, Vec<LayerRow>)> {
    if input.channels == 0 || input.height == 0 || input.width == 0 {
        return Err(Error::invalid("input", format!("{input} must be positive in every dimension")));
    }
    if input.channels != g.input_channels {
        return Err(Error::invalid(
            "input",
            format!("expected {} channels, got {}", g.input_channels, input.channels),
        ));
    }
    if !input.height.is_multiple_of(INPUT_DIVISOR) || !input.width.is_multiple_of(INPUT_DIVISOR) {
        return Err(Error::IndivisibleInput {
            height: input.height,
            width: input.width,
            divisor: INPUT_DIVISOR,
        });
    }
    let mut p = Propagator {
        pools: HashMap::new(),
        rows: Vec::new(),
    };
    let bottleneck = p.run(&g.encoder, input, true)?;
    let inst = p.run(&g.inst, bottleneck, true)?;
    let top = p.run(&g.top, bottleneck, true)?;
    Ok((inst, top, p.rows))
}

/// Output shapes of the instance and medial-axis heads.
pub fn propagate_shapes(g: &NetGraph, input: TensorShape) -> Result<(TensorShape, TensorShape)> {
    let (inst, top, _) = propagate(g, input)?;
    Ok((inst, top))
}

/// Every layer of the encoder, then the instance branch, then the
/// medial-axis branch.
pub fn layer_table(g: &NetGraph, input: TensorShape) -> Result<Vec<LayerRow>> {
    Ok(propagate(g, input)?.2)
}

/// Total trainable parameters. Independent of the input spatial size.
pub fn param_count(g: &NetGraph) -> Result<u64> {
    let probe = TensorShape::new(g.input_channels, INPUT_DIVISOR, INPUT_DIVISOR);
    Ok(layer_table(g, probe)?.iter().map(|r| r.params).sum())
}

/// Aligned plain-text rendering of a layer table.
pub fn format_table(rows: &[LayerRow]) -> String {
    let cells: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            [
                r.name.clone(),
                r.kind.to_string(),
                r.input.to_string(),
                r.output.to_string(),
                r.params.to_string(),
            ]
        })
        .collect();
    let header = ["name", "kind", "in", "out", "params"].map(String::from);
    let mut widths = header.clone().map(|h| h.len());
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    for row in std::iter::once(&header).chain(&cells) {
        let line = row
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 4 { format!("{c:>w$}") } else { format!("{c:<w$}") })
            .collect::<Vec<_>>()
            .join("  ");
        let _ = writeln!(out, "{}", line.trim_end());
    }
    let total: u64 = rows.iter().map(|r| r.params).sum();
    let _ = writeln!(out, "total params: {total}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn out_channels(layers: &[LayerSpec], name: &str) -> usize {
        layers
            .iter()
            .find_map(|l| match l.kind {
                LayerKind::Conv { out, .. } if l.name == name => Some(out),
                _ => None,
            })
            .unwrap()
    }

    #[test]
    fn block_widths() {
        let g = build_tanet();
        assert_eq!(out_channels(&g.encoder, "enc3.conv3"), 256);
        assert_eq!(out_channels(&g.inst, "inst.dec5.conv"), 64);
        assert_eq!(out_channels(&g.top, "top.dec5.conv"), 64);
        let heads = [&g.inst, &g.top]
            .iter()
            .filter(|b| matches!(b.last().unwrap().kind, LayerKind::Output { .. }))
            .count();
        assert_eq!(heads, 2);
    }

    #[test]
    fn shapes_for_patch_sizes() {
        let g = build_tanet();
        for s in [512, 768] {
            let (inst, top) = propagate_shapes(&g, TensorShape::new(3, s, s)).unwrap();
            assert_eq!(inst, TensorShape::new(2, s, s));
            assert_eq!(top, TensorShape::new(1, s, s));
        }
        assert!(matches!(
            propagate_shapes(&g, TensorShape::new(3, 500, 500)),
            Err(Error::IndivisibleInput { divisor: 32, .. })
        ));
    }

    #[test]
    fn single_conv_params() {
        assert_eq!(LayerKind::Conv { k: 3, out: 64, stride: 1 }.params(3), 1792);
    }

    #[test]
    fn params_ignore_spatial_size() {
        let g = build_tanet();
        let sum = |s| -> u64 {
            layer_table(&g, TensorShape::new(3, s, s)).unwrap().iter().map(|r| r.params).sum()
        };
        assert_eq!(sum(64), sum(512));
        assert_eq!(sum(64), param_count(&g).unwrap());
    }

    #[test]
    fn branches_match_except_heads() {
        let g = build_tanet();
        let body = |b: &[LayerSpec]| -> Vec<LayerKind> {
            b.iter().take_while(|l| !l.name.contains(".head.")).map(|l| l.kind.clone()).collect()
        };
        assert_eq!(body(&g.inst), body(&g.top));
        assert_ne!(g.inst[g.inst.len() - 3..], g.top[g.top.len() - 3..]);
    }

    #[test]
    fn literal_head_kernel_changes_only_head_params() {
        let one = build_tanet();
        let two = build_tanet_with(&NetOptions {
            inst_head_kernel: 2,
            ..Default::default()
        })
        .unwrap();
        let diff = param_count(&two).unwrap() - param_count(&one).unwrap();
        assert_eq!(diff, (4 - 1) * 64 * 2);
        assert!(build_tanet_with(&NetOptions {
            inst_head_kernel: 3,
            ..Default::default()
        })
        .is_err());
    }

    #[test]
    fn text_table_is_aligned() {
        let g = build_tanet();
        let rows = layer_table(&g, TensorShape::new(3, 64, 64)).unwrap();
        let text = format_table(&rows);
        assert_eq!(text.lines().count(), rows.len() + 2);
        assert!(text.starts_with("name"));
    }
}
