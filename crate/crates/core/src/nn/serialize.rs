//! Flat text serialization for networks: header lines describing the layer
//! layout, then row-major weights and biases per layer. Numbers use the
//! shortest decimal form that parses back to the identical f64, `.` as the
//! decimal separator regardless of locale.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::nn::activation::Activation;
use crate::nn::layer::DenseLayer;
use crate::nn::network::DenseNetwork;

const MAGIC: &str = "densenet v1";

pub fn network_to_string(net: &DenseNetwork) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "branches {}", net.branch_layers().len());
    for layer in net.branch_layers() {
        write_layer(&mut out, layer);
    }
    let _ = writeln!(out, "trunk {}", net.trunk_layers().len());
    for layer in net.trunk_layers() {
        write_layer(&mut out, layer);
    }
    out
}

fn write_layer(out: &mut String, layer: &DenseLayer) {
    let _ = writeln!(
        out,
        "layer {} {} {}",
        layer.in_dim(),
        layer.out_dim(),
        layer.activation().name()
    );
    for row in 0..layer.out_dim() {
        let slice = &layer.weights()[row * layer.in_dim()..(row + 1) * layer.in_dim()];
        push_values(out, slice);
    }
    push_values(out, layer.biases());
}

fn push_values(out: &mut String, values: &[f64]) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        let _ = write!(out, "{v}");
        first = false;
    }
    out.push('\n');
}

pub fn network_from_str(text: &str) -> Result<DenseNetwork> {
    let mut reader = LineReader::new(text);
    read_network(&mut reader)
}

/// Reads one network block (including its magic line) from a reader; lets
/// larger model files embed network blocks verbatim.
pub(crate) fn read_network(reader: &mut LineReader) -> Result<DenseNetwork> {
    reader.expect_line(MAGIC)?;
    let n_branches = reader.expect_counted("branches")?;
    let branches: Vec<DenseLayer> = (0..n_branches)
        .map(|_| read_layer(reader))
        .collect::<Result<_>>()?;
    let n_trunk = reader.expect_counted("trunk")?;
    let trunk: Vec<DenseLayer> = (0..n_trunk)
        .map(|_| read_layer(reader))
        .collect::<Result<_>>()?;
    DenseNetwork::from_layers(branches, trunk)
}

fn read_layer(reader: &mut LineReader) -> Result<DenseLayer> {
    let (lineno, line) = reader.next_line()?;
    let mut parts = line.split_whitespace();
    let parse_err = |message: String| Error::Parse {
        line: lineno,
        message,
    };
    if parts.next() != Some("layer") {
        return Err(parse_err("expected `layer <in> <out> <activation>`".into()));
    }
    let in_dim: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err("bad layer input width".into()))?;
    let out_dim: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err("bad layer output width".into()))?;
    let activation = Activation::from_name(
        parts
            .next()
            .ok_or_else(|| parse_err("missing activation".into()))?,
    )?;
    let mut weights = Vec::with_capacity(in_dim * out_dim);
    for _ in 0..out_dim {
        reader.read_values(in_dim, &mut weights)?;
    }
    let mut biases = Vec::with_capacity(out_dim);
    reader.read_values(out_dim, &mut biases)?;
    DenseLayer::from_parts(in_dim, out_dim, weights, biases, activation)
}

pub(crate) struct LineReader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> LineReader<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        LineReader {
            lines: text.lines().enumerate(),
        }
    }

    pub(crate) fn next_line(&mut self) -> Result<(usize, &'a str)> {
        for (i, line) in self.lines.by_ref() {
            if !line.trim().is_empty() {
                return Ok((i + 1, line));
            }
        }
        Err(Error::Parse {
            line: 0,
            message: "unexpected end of file".into(),
        })
    }

    pub(crate) fn expect_line(&mut self, expected: &str) -> Result<()> {
        let (lineno, line) = self.next_line()?;
        if line.trim() != expected {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {expected:?}, found {line:?}"),
            });
        }
        Ok(())
    }

    /// Reads a `<keyword> <count>` line.
    pub(crate) fn expect_counted(&mut self, keyword: &str) -> Result<usize> {
        let (lineno, line) = self.next_line()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(keyword) {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected `{keyword} <count>`, found {line:?}"),
            });
        }
        parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or(Error::Parse {
                line: lineno,
                message: format!("bad count after `{keyword}`"),
            })
    }

    /// Reads exactly `count` whitespace-separated finite floats from the
    /// next line into `into`.
    pub(crate) fn read_values(&mut self, count: usize, into: &mut Vec<f64>) -> Result<()> {
        let (lineno, line) = self.next_line()?;
        let start = into.len();
        for token in line.split_whitespace() {
            let v: f64 = token.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("not a number: {token:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("non-finite value: {token:?}"),
                });
            }
            into.push(v);
        }
        if into.len() - start != count {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {count} values, found {}", into.len() - start),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn round_trip_is_bitwise_exact() {
        let mut rng = stream(31, "serialize", 0);
        let net = DenseNetwork::branched(
            vec![
                DenseLayer::glorot(1, 5, Activation::Elu, &mut rng).unwrap(),
                DenseLayer::glorot(3, 5, Activation::Elu, &mut rng).unwrap(),
            ],
            vec![
                DenseLayer::glorot(10, 4, Activation::Elu, &mut rng).unwrap(),
                DenseLayer::glorot(4, 2, Activation::Relu, &mut rng).unwrap(),
            ],
        )
        .unwrap();
        let text = network_to_string(&net);
        let back = network_from_str(&text).unwrap();
        assert_eq!(net.flat_params(), back.flat_params());
        assert_eq!(net, back);
    }

    #[test]
    fn rejects_corrupt_header() {
        assert!(network_from_str("nonsense\n").is_err());
    }

    #[test]
    fn rejects_wrong_value_count() {
        let text = "densenet v1\nbranches 0\ntrunk 1\nlayer 2 1 relu\n1.0\n0.0\n";
        match network_from_str(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
