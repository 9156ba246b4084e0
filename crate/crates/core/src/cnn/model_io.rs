//! Versioned text format for [`MicroCnn`] parameters.
//!
//! ```text
//! spectra-micro-cnn 1
//! shape <in_channels> <height> <width> <conv1_channels> <conv2_channels>
//! dropout <rate>
//! seed <seed>
//! tensor <name> <rank> <dim>...
//! <values, space separated>
//! ```
//!
//! Values are written in shortest round-trip exponent form, so load(save(n))
//! reproduces every parameter bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::layers::{ConvParams, DenseParams};
use super::network::{CnnShape, MicroCnn, Parameters};
use super::CnnError;

pub const MAGIC: &str = "spectra-micro-cnn";
pub const FORMAT_VERSION: u32 = 1;

fn push_tensor(out: &mut String, name: &str, dims: &[usize], values: &[f64]) {
    let _ = write!(out, "tensor {name} {}", dims.len());
    for d in dims {
        let _ = write!(out, " {d}");
    }
    out.push('\n');
    let line: Vec<String> = values.iter().map(|v| format!("{v:e}")).collect();
    out.push_str(&line.join(" "));
    out.push('\n');
}

pub fn model_to_string(net: &MicroCnn) -> String {
    let s = net.shape();
    let p = net.params();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {FORMAT_VERSION}");
    let _ = writeln!(
        out,
        "shape {} {} {} {} {}",
        s.in_channels, s.height, s.width, s.conv1_channels, s.conv2_channels
    );
    let _ = writeln!(out, "dropout {:e}", net.dropout_rate());
    let _ = writeln!(out, "seed {}", net.seed());
    let c1 = &p.conv1;
    push_tensor(&mut out, "conv1.kernels", &[c1.out_channels, c1.in_channels, c1.kh, c1.kw], &c1.kernels);
    push_tensor(&mut out, "conv1.biases", &[c1.out_channels], &c1.biases);
    let c2 = &p.conv2;
    push_tensor(&mut out, "conv2.kernels", &[c2.out_channels, c2.in_channels, c2.kh, c2.kw], &c2.kernels);
    push_tensor(&mut out, "conv2.biases", &[c2.out_channels], &c2.biases);
    let d = &p.dense;
    push_tensor(&mut out, "dense.weights", &[d.outputs, d.inputs], &d.weights);
    push_tensor(&mut out, "dense.biases", &[d.outputs], &d.biases);
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str), CnnError> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| CnnError::ModelFormat(format!("unexpected end of file, expected {what}")))
    }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, CnnError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| CnnError::ModelFormat(format!("line {line}: bad {what}")))
}

fn keyed<'a>(lines: &mut Lines<'a>, key: &str) -> Result<(usize, std::str::SplitWhitespace<'a>), CnnError> {
    let (no, line) = lines.next(key)?;
    let mut toks = line.split_whitespace();
    if toks.next() != Some(key) {
        return Err(CnnError::ModelFormat(format!("line {no}: expected `{key}`")));
    }
    Ok((no, toks))
}

fn read_tensor(lines: &mut Lines<'_>, name: &str) -> Result<(Vec<usize>, Vec<f64>), CnnError> {
    let (no, mut toks) = keyed(lines, "tensor")?;
    if toks.next() != Some(name) {
        return Err(CnnError::ModelFormat(format!("line {no}: expected tensor `{name}`")));
    }
    let rank: usize = parse_num(toks.next(), no, "rank")?;
    let dims = (0..rank)
        .map(|_| parse_num(toks.next(), no, "dimension"))
        .collect::<Result<Vec<usize>, _>>()?;
    let (vno, values) = lines.next("tensor values")?;
    let values = values
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| CnnError::ModelFormat(format!("line {vno}: bad value `{t}`"))))
        .collect::<Result<Vec<f64>, _>>()?;
    if values.len() != dims.iter().product::<usize>() {
        return Err(CnnError::ModelFormat(format!(
            "line {vno}: tensor `{name}` expects {} values, found {}",
            dims.iter().product::<usize>(),
            values.len()
        )));
    }
    Ok((dims, values))
}

fn conv_from(kernels: (Vec<usize>, Vec<f64>), biases: (Vec<usize>, Vec<f64>)) -> Result<ConvParams, CnnError> {
    let d = &kernels.0;
    if d.len() != 4 {
        return Err(CnnError::ModelFormat("conv kernels must have rank 4".into()));
    }
    ConvParams::new(d[0], d[1], d[2], d[3], kernels.1, biases.1)
}

pub fn model_from_str(text: &str) -> Result<MicroCnn, CnnError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (no, mut header) = keyed(&mut lines, MAGIC)?;
    let version: u32 = parse_num(header.next(), no, "format version")?;
    if version != FORMAT_VERSION {
        return Err(CnnError::ModelFormat(format!("unsupported format version {version}")));
    }
    let (no, mut toks) = keyed(&mut lines, "shape")?;
    let mut dim = || parse_num::<usize>(toks.next(), no, "shape");
    let shape = CnnShape {
        in_channels: dim()?,
        height: dim()?,
        width: dim()?,
        conv1_channels: dim()?,
        conv2_channels: dim()?,
    };
    let (no, mut toks) = keyed(&mut lines, "dropout")?;
    let dropout: f64 = parse_num(toks.next(), no, "dropout rate")?;
    let (no, mut toks) = keyed(&mut lines, "seed")?;
    let seed: u64 = parse_num(toks.next(), no, "seed")?;

    let conv1 = conv_from(read_tensor(&mut lines, "conv1.kernels")?, read_tensor(&mut lines, "conv1.biases")?)?;
    let conv2 = conv_from(read_tensor(&mut lines, "conv2.kernels")?, read_tensor(&mut lines, "conv2.biases")?)?;
    let (wd, weights) = read_tensor(&mut lines, "dense.weights")?;
    let (_, biases) = read_tensor(&mut lines, "dense.biases")?;
    if wd.len() != 2 {
        return Err(CnnError::ModelFormat("dense weights must have rank 2".into()));
    }
    let dense = DenseParams::new(wd[0], wd[1], weights, biases)?;
    MicroCnn::from_parts(shape, Parameters { conv1, conv2, dense }, dropout, seed)
}

pub fn save_model(net: &MicroCnn, path: &Path) -> Result<(), CnnError> {
    fs::write(path, model_to_string(net)).map_err(|e| CnnError::Io(format!("{}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> Result<MicroCnn, CnnError> {
    let text = fs::read_to_string(path).map_err(|e| CnnError::Io(format!("{}: {e}", path.display())))?;
    model_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net() -> MicroCnn {
        MicroCnn::new(
            CnnShape {
                in_channels: 1,
                height: 8,
                width: 12,
                conv1_channels: 3,
                conv2_channels: 2,
            },
            0.25,
            99,
        )
        .unwrap()
    }

    #[test]
    fn text_round_trip_is_exact() {
        let n = net();
        let text = model_to_string(&n);
        assert!(text.starts_with("spectra-micro-cnn 1\n"));
        let back = model_from_str(&text).unwrap();
        assert_eq!(back, n);
        assert_eq!(model_to_string(&back), text);
    }

    #[test]
    fn malformed_files_rejected() {
        let text = model_to_string(&net());
        assert!(model_from_str(&text.replace("spectra-micro-cnn 1", "spectra-micro-cnn 2")).is_err());
        assert!(model_from_str(&text.replace("conv2.biases 1 2", "conv2.biases 1 3")).is_err());
        let truncated: String = text.lines().take(6).collect::<Vec<_>>().join("\n");
        assert!(matches!(model_from_str(&truncated), Err(CnnError::ModelFormat(_))));
    }
}
