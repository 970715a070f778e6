//! Versioned binary model container.
//!
//! `AFMD1` layout: 5-byte magic, u8 representation tag, then a shape header
//! and the parameters as little-endian 64-bit floats.
//!
//! SVM payload: u32 dim, u32 functional count, functional ids, 7×dim
//! weights, 7 biases, dim means, dim stds, f64 lambda, u32 epochs, u64 seed.
//!
//! LSTM payload: u32 input_dim, u32 hidden_dim, the four gate matrices
//! (hidden × (input+hidden)) and biases, 7×hidden readout and 7 biases,
//! input_dim means and stds, then the hyperparameters.

use super::lstm::LstmParams;
use super::scoring::{Representation, TrainedModel};
use super::{LinearSvmModel, LstmHyperparams, LstmModel, Standardizer, SvmHyperparams};
use crate::error::{Error, Result};
use crate::seqmap::Functional;
use crate::NUM_CLASSES;
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::{Array1, Array2};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 5] = b"AFMD1";

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let path_str = path.as_ref().display().to_string();
    let file = File::create(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(MAGIC).map_err(|e| Error::io(&path_str, e))?;
    w.write_u8(model.representation().tag())
        .map_err(|e| Error::io(&path_str, e))?;
    match model {
        TrainedModel::Svm(svm) => write_svm(&mut w, svm, &path_str)?,
        TrainedModel::SeqLstm(lstm) | TrainedModel::MapLstm(lstm) => {
            write_lstm(&mut w, lstm, &path_str)?
        }
    }
    w.flush().map_err(|e| Error::io(&path_str, e))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path_str = path.as_ref().display().to_string();
    let file = File::open(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)
        .map_err(|e| Error::io(&path_str, e))?;
    if &magic != MAGIC {
        return Err(bad(&path_str, format!("bad magic {magic:?}")));
    }
    let tag = r.read_u8().map_err(|e| Error::io(&path_str, e))?;
    let rep = Representation::from_tag(tag)
        .ok_or_else(|| bad(&path_str, format!("unknown representation tag {tag}")))?;
    match rep {
        Representation::HolisticSvm => Ok(TrainedModel::Svm(read_svm(&mut r, &path_str)?)),
        Representation::SeqLstm => Ok(TrainedModel::SeqLstm(read_lstm(&mut r, &path_str)?)),
        Representation::MapLstm => Ok(TrainedModel::MapLstm(read_lstm(&mut r, &path_str)?)),
    }
}

fn bad(path: &str, detail: String) -> Error {
    Error::BadContainer {
        format: "AFMD1",
        path: path.to_string(),
        detail,
    }
}

fn write_svm<W: Write>(w: &mut W, svm: &LinearSvmModel, path: &str) -> Result<()> {
    let (weights, biases, standardizer, functionals) = svm.parts();
    let dim = weights.ncols();
    let io = |e| Error::io(path, e);
    w.write_u32::<LittleEndian>(dim as u32).map_err(io)?;
    w.write_u32::<LittleEndian>(functionals.len() as u32)
        .map_err(io)?;
    for f in functionals {
        w.write_u8(f.id()).map_err(io)?;
    }
    write_f64s(w, weights.iter(), path)?;
    write_f64s(w, biases.iter(), path)?;
    let (mean, std) = standardizer.parts();
    write_f64s(w, mean.iter(), path)?;
    write_f64s(w, std.iter(), path)?;
    let hp = svm.hyperparams();
    w.write_f64::<LittleEndian>(hp.lambda).map_err(io)?;
    w.write_u32::<LittleEndian>(hp.epochs as u32).map_err(io)?;
    w.write_u64::<LittleEndian>(hp.seed).map_err(io)?;
    Ok(())
}

fn read_svm<R: Read>(r: &mut R, path: &str) -> Result<LinearSvmModel> {
    let io = |e| Error::io(path, e);
    let dim = r.read_u32::<LittleEndian>().map_err(io)? as usize;
    let n_func = r.read_u32::<LittleEndian>().map_err(io)? as usize;
    let mut functionals = Vec::with_capacity(n_func);
    for _ in 0..n_func {
        let id = r.read_u8().map_err(io)?;
        functionals.push(
            Functional::from_id(id)
                .ok_or_else(|| bad(path, format!("unknown functional id {id}")))?,
        );
    }
    let weights = read_matrix(r, NUM_CLASSES, dim, path)?;
    let mut biases = [0.0; NUM_CLASSES];
    read_f64s(r, &mut biases, path)?;
    let mut mean = vec![0.0; dim];
    read_f64s(r, &mut mean, path)?;
    let mut std = vec![0.0; dim];
    read_f64s(r, &mut std, path)?;
    let lambda = r.read_f64::<LittleEndian>().map_err(io)?;
    let epochs = r.read_u32::<LittleEndian>().map_err(io)? as usize;
    let seed = r.read_u64::<LittleEndian>().map_err(io)?;
    Ok(LinearSvmModel::from_parts(
        weights,
        biases,
        Standardizer::from_parts(mean, std),
        functionals,
        SvmHyperparams {
            lambda,
            epochs,
            seed,
        },
    ))
}

fn write_lstm<W: Write>(w: &mut W, lstm: &LstmModel, path: &str) -> Result<()> {
    let io = |e| Error::io(path, e);
    w.write_u32::<LittleEndian>(lstm.input_dim() as u32)
        .map_err(io)?;
    w.write_u32::<LittleEndian>(lstm.hidden_dim() as u32)
        .map_err(io)?;
    let p = lstm.params();
    for m in [&p.w_input, &p.w_forget, &p.w_output, &p.w_cell] {
        write_f64s(w, m.iter(), path)?;
    }
    for v in [&p.b_input, &p.b_forget, &p.b_output, &p.b_cell] {
        write_f64s(w, v.iter(), path)?;
    }
    write_f64s(w, p.w_readout.iter(), path)?;
    write_f64s(w, p.b_readout.iter(), path)?;
    let (mean, std) = lstm.standardizer().parts();
    write_f64s(w, mean.iter(), path)?;
    write_f64s(w, std.iter(), path)?;
    let hp = lstm.hyperparams();
    w.write_f64::<LittleEndian>(hp.learning_rate).map_err(io)?;
    w.write_u32::<LittleEndian>(hp.epochs as u32).map_err(io)?;
    w.write_f64::<LittleEndian>(hp.clip_norm).map_err(io)?;
    w.write_u64::<LittleEndian>(hp.seed).map_err(io)?;
    w.write_f64::<LittleEndian>(hp.weight_decay).map_err(io)?;
    w.write_u32::<LittleEndian>(hp.batch_size as u32)
        .map_err(io)?;
    w.write_u32::<LittleEndian>(hp.lr_decay_every as u32)
        .map_err(io)?;
    w.write_f64::<LittleEndian>(hp.lr_decay_factor).map_err(io)?;
    w.write_u32::<LittleEndian>(hp.max_steps as u32)
        .map_err(io)?;
    Ok(())
}

fn read_lstm<R: Read>(r: &mut R, path: &str) -> Result<LstmModel> {
    let io = |e| Error::io(path, e);
    let input_dim = r.read_u32::<LittleEndian>().map_err(io)? as usize;
    let hidden_dim = r.read_u32::<LittleEndian>().map_err(io)? as usize;
    if input_dim == 0 || hidden_dim == 0 {
        return Err(bad(path, "zero model dimensions".to_string()));
    }
    let z = input_dim + hidden_dim;
    let params = LstmParams {
        w_input: read_matrix(r, hidden_dim, z, path)?,
        w_forget: read_matrix(r, hidden_dim, z, path)?,
        w_output: read_matrix(r, hidden_dim, z, path)?,
        w_cell: read_matrix(r, hidden_dim, z, path)?,
        b_input: read_vector(r, hidden_dim, path)?,
        b_forget: read_vector(r, hidden_dim, path)?,
        b_output: read_vector(r, hidden_dim, path)?,
        b_cell: read_vector(r, hidden_dim, path)?,
        w_readout: read_matrix(r, NUM_CLASSES, hidden_dim, path)?,
        b_readout: read_vector(r, NUM_CLASSES, path)?,
    };
    let mut mean = vec![0.0; input_dim];
    read_f64s(r, &mut mean, path)?;
    let mut std = vec![0.0; input_dim];
    read_f64s(r, &mut std, path)?;
    let hyperparams = LstmHyperparams {
        hidden_dim,
        learning_rate: r.read_f64::<LittleEndian>().map_err(io)?,
        epochs: r.read_u32::<LittleEndian>().map_err(io)? as usize,
        clip_norm: r.read_f64::<LittleEndian>().map_err(io)?,
        seed: r.read_u64::<LittleEndian>().map_err(io)?,
        weight_decay: r.read_f64::<LittleEndian>().map_err(io)?,
        batch_size: r.read_u32::<LittleEndian>().map_err(io)? as usize,
        lr_decay_every: r.read_u32::<LittleEndian>().map_err(io)? as usize,
        lr_decay_factor: r.read_f64::<LittleEndian>().map_err(io)?,
        max_steps: r.read_u32::<LittleEndian>().map_err(io)? as usize,
    };
    Ok(LstmModel::from_parts(
        input_dim,
        hidden_dim,
        params,
        Standardizer::from_parts(mean, std),
        hyperparams,
    ))
}

fn write_f64s<'a, W: Write>(
    w: &mut W,
    values: impl Iterator<Item = &'a f64>,
    path: &str,
) -> Result<()> {
    for &v in values {
        w.write_f64::<LittleEndian>(v)
            .map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn read_f64s<R: Read>(r: &mut R, out: &mut [f64], path: &str) -> Result<()> {
    for v in out {
        *v = r
            .read_f64::<LittleEndian>()
            .map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn read_matrix<R: Read>(r: &mut R, rows: usize, cols: usize, path: &str) -> Result<Array2<f64>> {
    let mut data = vec![0.0; rows * cols];
    read_f64s(r, &mut data, path)?;
    Array2::from_shape_vec((rows, cols), data)
        .map_err(|e| bad(path, format!("matrix shape: {e}")))
}

fn read_vector<R: Read>(r: &mut R, len: usize, path: &str) -> Result<Array1<f64>> {
    let mut data = vec![0.0; len];
    read_f64s(r, &mut data, path)?;
    Ok(Array1::from(data))
}
