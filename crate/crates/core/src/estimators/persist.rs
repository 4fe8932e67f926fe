//! Text persistence for trained models.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! saved-then-loaded model predicts bit-identically.
//!
//! ```text
//! # mlp-v1
//! dims 7 16 4 1
//! activation relu
//! input_mean ... / input_std ... / output_mean ... / output_std ...
//! training_loss <value|none>
//! weights <layer> ...
//! biases <layer> ...
//! ```
//!
//! ```text
//! # forest-v1
//! features 302 trees 100
//! tree <node count>
//! S <feature> <threshold> <left> <right>
//! L <c0> <c1> <c2> <c3> <c4>
//! ```

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::forest::{DecisionTree, ForestModel, Node};
use super::mlp::{Activation, Layer, MlpModel, Standardizer};
use crate::domain::ShapeClass;
use crate::{Error, Result};

const MLP_MAGIC: &str = "# mlp-v1";
const FOREST_MAGIC: &str = "# forest-v1";

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn mlp_to_string(model: &MlpModel) -> String {
    let mut s = String::new();
    writeln!(s, "{MLP_MAGIC}").unwrap();
    writeln!(s, "dims {}", join(&model.layer_dims)).unwrap();
    writeln!(s, "activation {}", model.activation.name()).unwrap();
    writeln!(s, "input_mean {}", join(&model.input_scale.mean)).unwrap();
    writeln!(s, "input_std {}", join(&model.input_scale.std)).unwrap();
    writeln!(s, "output_mean {}", join(&model.output_scale.mean)).unwrap();
    writeln!(s, "output_std {}", join(&model.output_scale.std)).unwrap();
    match model.training_loss {
        Some(l) => writeln!(s, "training_loss {l}").unwrap(),
        None => writeln!(s, "training_loss none").unwrap(),
    }
    for (i, l) in model.layers.iter().enumerate() {
        writeln!(s, "weights {i} {}", join(&l.weights)).unwrap();
        writeln!(s, "biases {i} {}", join(&l.biases)).unwrap();
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            line: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::format(self.line, msg)
    }

    fn next_line(&mut self) -> Result<&'a str> {
        loop {
            let (i, l) = self
                .inner
                .next()
                .ok_or_else(|| Error::format(self.line + 1, "unexpected end of file"))?;
            self.line = i + 1;
            if !l.trim().is_empty() {
                return Ok(l.trim());
            }
        }
    }

    /// Next line, which must start with `key`; returns the remaining tokens.
    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let l = self.next_line()?;
        let mut toks = l.split_whitespace();
        if toks.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`")));
        }
        Ok(toks.collect())
    }

    fn parse<T: FromStr>(&self, tok: &str) -> Result<T> {
        tok.parse()
            .map_err(|_| self.err(format!("cannot parse `{tok}`")))
    }

    fn parse_all<T: FromStr>(&self, toks: &[&str], expect: usize) -> Result<Vec<T>> {
        if toks.len() != expect {
            return Err(self.err(format!("expected {expect} values, found {}", toks.len())));
        }
        toks.iter().map(|t| self.parse(t)).collect()
    }

    fn finish(&mut self) -> Result<()> {
        for (i, l) in self.inner.by_ref() {
            if !l.trim().is_empty() {
                return Err(Error::format(i + 1, "trailing content"));
            }
        }
        Ok(())
    }
}

pub fn mlp_from_str(text: &str) -> Result<MlpModel> {
    let mut lines = Lines::new(text);
    if lines.next_line()? != MLP_MAGIC {
        return Err(lines.err("missing mlp-v1 header"));
    }
    let toks = lines.keyed("dims")?;
    let dims: Vec<usize> = lines.parse_all(&toks, toks.len())?;
    let mut model = MlpModel::zeros(&dims).map_err(|e| lines.err(e.to_string()))?;
    let toks = lines.keyed("activation")?;
    model.activation = match toks.as_slice() {
        [a] => {
            Activation::parse(a).ok_or_else(|| lines.err(format!("unknown activation `{a}`")))?
        }
        _ => return Err(lines.err("expected one activation name")),
    };
    let (din, dout) = (model.input_dim(), model.output_dim());
    let toks = lines.keyed("input_mean")?;
    let mean = lines.parse_all(&toks, din)?;
    let toks = lines.keyed("input_std")?;
    let std = lines.parse_all(&toks, din)?;
    model.input_scale = Standardizer { mean, std };
    let toks = lines.keyed("output_mean")?;
    let mean = lines.parse_all(&toks, dout)?;
    let toks = lines.keyed("output_std")?;
    let std = lines.parse_all(&toks, dout)?;
    model.output_scale = Standardizer { mean, std };
    let toks = lines.keyed("training_loss")?;
    model.training_loss = match toks.as_slice() {
        ["none"] => None,
        [v] => Some(lines.parse(v)?),
        _ => return Err(lines.err("expected one training loss")),
    };
    for i in 0..model.layers.len() {
        let Layer {
            inputs, outputs, ..
        } = model.layers[i];
        let toks = lines.keyed("weights")?;
        if toks.first().map(|t| lines.parse::<usize>(t)).transpose()? != Some(i) {
            return Err(lines.err(format!("expected weights for layer {i}")));
        }
        model.layers[i].weights = lines.parse_all(&toks[1..], inputs * outputs)?;
        let toks = lines.keyed("biases")?;
        if toks.first().map(|t| lines.parse::<usize>(t)).transpose()? != Some(i) {
            return Err(lines.err(format!("expected biases for layer {i}")));
        }
        model.layers[i].biases = lines.parse_all(&toks[1..], outputs)?;
    }
    lines.finish()?;
    model
        .validate()
        .map_err(|e| Error::format(0, e.to_string()))?;
    Ok(model)
}

pub fn forest_to_string(model: &ForestModel) -> String {
    let mut s = String::new();
    writeln!(s, "{FOREST_MAGIC}").unwrap();
    writeln!(
        s,
        "features {} trees {}",
        model.n_features,
        model.trees.len()
    )
    .unwrap();
    for t in &model.trees {
        writeln!(s, "tree {}", t.nodes.len()).unwrap();
        for n in &t.nodes {
            match n {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => writeln!(s, "S {feature} {threshold} {left} {right}").unwrap(),
                Node::Leaf { counts } => writeln!(s, "L {}", join(counts)).unwrap(),
            }
        }
    }
    s
}

pub fn forest_from_str(text: &str) -> Result<ForestModel> {
    let mut lines = Lines::new(text);
    if lines.next_line()? != FOREST_MAGIC {
        return Err(lines.err("missing forest-v1 header"));
    }
    let toks = lines.keyed("features")?;
    let (n_features, n_trees): (usize, usize) = match toks.as_slice() {
        [f, "trees", t] => (lines.parse(f)?, lines.parse(t)?),
        _ => return Err(lines.err("expected `features <d> trees <n>`")),
    };
    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let toks = lines.keyed("tree")?;
        let n: usize = match toks.as_slice() {
            [n] => lines.parse(n)?,
            _ => return Err(lines.err("expected node count")),
        };
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let l = lines.next_line()?;
            let toks: Vec<&str> = l.split_whitespace().collect();
            let node = match toks.as_slice() {
                ["S", f, t, a, b] => Node::Split {
                    feature: lines.parse(f)?,
                    threshold: lines.parse(t)?,
                    left: lines.parse(a)?,
                    right: lines.parse(b)?,
                },
                ["L", rest @ ..] => {
                    let c: Vec<usize> = lines.parse_all(rest, ShapeClass::COUNT)?;
                    Node::Leaf {
                        counts: c.try_into().unwrap(),
                    }
                }
                _ => return Err(lines.err("expected a split or leaf node")),
            };
            nodes.push(node);
        }
        trees.push(DecisionTree { nodes });
    }
    lines.finish()?;
    ForestModel::from_trees(n_features, trees).map_err(|e| Error::format(0, e.to_string()))
}

pub fn save_mlp(model: &MlpModel, path: &Path) -> Result<()> {
    std::fs::write(path, mlp_to_string(model))?;
    Ok(())
}

pub fn load_mlp(path: &Path) -> Result<MlpModel> {
    mlp_from_str(&std::fs::read_to_string(path)?)
}

pub fn save_forest(model: &ForestModel, path: &Path) -> Result<()> {
    std::fs::write(path, forest_to_string(model))?;
    Ok(())
}

pub fn load_forest(path: &Path) -> Result<ForestModel> {
    forest_from_str(&std::fs::read_to_string(path)?)
}
