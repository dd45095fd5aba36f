//! Model file: a self-describing text container for the trained generator
//! and critic, the label domains, the feature scaling, and the schema hash
//! of the catalog the model was trained against.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! saved model reloads bit-exactly and repeated runs produce byte-identical
//! files.

use std::path::Path;

use thiserror::Error;

use crate::catalog::{fmt_f64, Catalog, CatalogError, LabelCodec, Parser};
use crate::cgen::{CgenError, FeatureScaler, GeneratorHandle};
use crate::neural::{Activation, Matrix, Mlp};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Parse(#[from] CatalogError),
    #[error(transparent)]
    Handle(#[from] CgenError),
    #[error(
        "model schema hash {model:016x} does not match catalog schema hash {catalog:016x}"
    )]
    SchemaMismatch { model: u64, catalog: u64 },
    #[error("model declares {model} groups but the catalog has {catalog}")]
    GroupDomainMismatch { model: usize, catalog: usize },
}

/// Serializes the generator handle plus the critic that trained against it.
pub fn save_model(
    path: impl AsRef<Path>,
    handle: &GeneratorHandle,
    critic: &Mlp,
) -> Result<(), ModelError> {
    use std::fmt::Write;
    let mut s = String::new();
    let _ = writeln!(s, "genaqp model v1");
    let _ = writeln!(s, "schema_hash = {:016x}", handle.schema_hash());
    let _ = writeln!(s, "noise_dim = {}", handle.noise_dim());
    let _ = writeln!(s, "feature_count = {}", handle.feature_count());
    for c in 0..handle.feature_count() {
        let (min, max) = handle.scaler().bounds(c);
        let _ = writeln!(s, "scale {c} = {} {}", fmt_f64(min), fmt_f64(max));
    }
    let group = handle.group_codec();
    let _ = writeln!(s, "group_count = {}", group.width());
    for (i, label) in group.domain().iter().enumerate() {
        let _ = writeln!(s, "group {i} = {label}");
    }
    match handle.bucket_codec() {
        Some(codec) => {
            let _ = writeln!(s, "bucket_count = {}", codec.width());
        }
        None => {
            let _ = writeln!(s, "bucket_count = 0");
        }
    }
    write_mlp(&mut s, "generator", handle.generator());
    write_mlp(&mut s, "critic", critic);
    std::fs::write(path, s)?;
    Ok(())
}

fn write_mlp(s: &mut String, name: &str, mlp: &Mlp) {
    use std::fmt::Write;
    let dims: Vec<String> = mlp.dims().iter().map(|d| d.to_string()).collect();
    let _ = writeln!(s, "{name} dims = {}", dims.join(" "));
    let _ = writeln!(s, "{name} hidden = {}", mlp.hidden_activation());
    let _ = writeln!(s, "{name} output = {}", mlp.output_activation());
    for (i, w) in mlp.weights().iter().enumerate() {
        let joined: Vec<String> = w.data().iter().map(|v| fmt_f64(*v)).collect();
        let _ = writeln!(s, "{name} w{i} = {}", joined.join(" "));
        let joined: Vec<String> = mlp.biases()[i].iter().map(|v| fmt_f64(*v)).collect();
        let _ = writeln!(s, "{name} b{i} = {}", joined.join(" "));
    }
}

fn read_mlp(p: &mut Parser<'_>, name: &str) -> Result<Mlp, ModelError> {
    let dims_raw = p.value(&format!("{name} dims"))?;
    let dims: Vec<usize> = dims_raw
        .split(' ')
        .map(|t| t.parse::<usize>().map_err(|e| p.err(format!("bad dim: {e}"))))
        .collect::<Result<_, _>>()?;
    if dims.len() < 2 || dims.contains(&0) {
        return Err(p.err(format!("'{name}' needs at least two nonzero layer dims")).into());
    }
    let hidden: Activation = p
        .value(&format!("{name} hidden"))?
        .parse()
        .map_err(|e| p.err(e))?;
    let output: Activation = p
        .value(&format!("{name} output"))?
        .parse()
        .map_err(|e| p.err(e))?;
    let mut weights = Vec::with_capacity(dims.len().saturating_sub(1));
    let mut biases = Vec::with_capacity(dims.len().saturating_sub(1));
    for i in 0..dims.len().saturating_sub(1) {
        let (fan_in, fan_out) = (dims[i], dims[i + 1]);
        let w = p.f64_array(&format!("{name} w{i}"), fan_in * fan_out)?;
        weights.push(Matrix::from_vec(fan_out, fan_in, w));
        biases.push(p.f64_array(&format!("{name} b{i}"), fan_out)?);
    }
    Ok(Mlp::from_parts(dims, weights, biases, hidden, output))
}

/// Loads a model file back into a generator handle and its critic.
pub fn load_model(path: impl AsRef<Path>) -> Result<(GeneratorHandle, Mlp), ModelError> {
    let text = std::fs::read_to_string(path)?;
    let mut p = Parser::new(&text);
    p.expect_header("genaqp model v1")?;
    let schema_hash = u64::from_str_radix(&p.value("schema_hash")?, 16)
        .map_err(|e| p.err(format!("bad schema_hash: {e}")))?;
    let noise_dim: usize = p.parse_value("noise_dim")?;
    let feature_count: usize = p.parse_value("feature_count")?;
    let mut mins = Vec::with_capacity(feature_count);
    let mut maxs = Vec::with_capacity(feature_count);
    for c in 0..feature_count {
        let pair = p.f64_array(&format!("scale {c}"), 2)?;
        mins.push(pair[0]);
        maxs.push(pair[1]);
    }
    let group_count: usize = p.parse_value("group_count")?;
    let mut domain = Vec::with_capacity(group_count);
    for i in 0..group_count {
        domain.push(p.value(&format!("group {i}"))?);
    }
    let bucket_count: usize = p.parse_value("bucket_count")?;
    let generator = read_mlp(&mut p, "generator")?;
    let critic = read_mlp(&mut p, "critic")?;

    let scaler = FeatureScaler::from_parts(mins, maxs)?;
    let bucket_codec = if bucket_count > 0 {
        Some(LabelCodec::new(
            (0..bucket_count).map(|b| b.to_string()).collect(),
        ))
    } else {
        None
    };
    let handle = GeneratorHandle::new(
        generator,
        LabelCodec::new(domain),
        bucket_codec,
        scaler,
        noise_dim,
        schema_hash,
    )?;
    Ok((handle, critic))
}

/// Checks that a loaded model belongs to this catalog before queries use it.
pub fn validate_against_catalog(
    handle: &GeneratorHandle,
    catalog: &Catalog,
) -> Result<(), ModelError> {
    if handle.schema_hash() != catalog.schema_hash() {
        return Err(ModelError::SchemaMismatch {
            model: handle.schema_hash(),
            catalog: catalog.schema_hash(),
        });
    }
    if handle.group_count() != catalog.group_count() {
        return Err(ModelError::GroupDomainMismatch {
            model: handle.group_count(),
            catalog: catalog.group_count(),
        });
    }
    Ok(())
}
