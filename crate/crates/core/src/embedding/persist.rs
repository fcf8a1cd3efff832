//! Native model file.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      b"VECFORGE1"
//! version    u32
//! meta_len   u64
//! metadata   meta_len bytes: hyper-parameters, vocabulary, document tags,
//!            matrix shapes
//! payload    w_in, w_out, docs as raw f32 rows
//! checksum   SHA-256 of every preceding byte
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{EmbeddingModel, Hyperparams, Matrix, Mode, ModelError};
use crate::corpus::Vocabulary;

pub const MAGIC: &[u8; 9] = b"VECFORGE1";
pub const FORMAT_VERSION: u32 = 1;
const CHECKSUM_LEN: usize = 32;

pub fn save_model<P: AsRef<Path>>(model: &EmbeddingModel, path: P) -> Result<(), ModelError> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_model(model, &mut writer)?;
    writer.flush()?;
    Ok(())
}

pub fn load_model<P: AsRef<Path>>(path: P) -> Result<EmbeddingModel, ModelError> {
    read_model(BufReader::new(File::open(path)?))
}

pub fn write_model<W: Write>(model: &EmbeddingModel, writer: W) -> Result<(), ModelError> {
    let meta = encode_metadata(model);
    let mut out = HashingWriter { inner: writer, hasher: Sha256::new() };
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&(meta.len() as u64).to_le_bytes())?;
    out.write_all(&meta)?;
    for matrix in [model.w_in(), model.w_out(), model.docs()] {
        let mut buf = Vec::with_capacity(matrix.as_slice().len() * 4);
        for x in matrix.as_slice() {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    let digest = out.hasher.finalize();
    out.inner.write_all(&digest)?;
    Ok(())
}

/// Reads a complete model. Nothing is returned unless every section is
/// present and the checksum matches.
pub fn read_model<R: Read>(mut reader: R) -> Result<EmbeddingModel, ModelError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;

    let mut cur = Cursor::new(&bytes);
    if cur.take(MAGIC.len()).map_err(|_| ModelError::BadMagic)? != MAGIC {
        return Err(ModelError::BadMagic);
    }
    let version = cur.u32()?;
    if version != FORMAT_VERSION {
        return Err(ModelError::VersionMismatch(version));
    }
    let meta_len = cur.u64()? as usize;
    let meta = Metadata::decode(cur.take(meta_len)?)?;

    let payload_floats = meta.shapes.iter().map(|(r, c)| r * c).sum::<usize>();
    let expected = cur.pos + payload_floats * 4 + CHECKSUM_LEN;
    if bytes.len() < expected {
        return Err(ModelError::Truncated);
    }
    if bytes.len() > expected {
        return Err(ModelError::Metadata("trailing bytes after checksum".into()));
    }
    let body_end = expected - CHECKSUM_LEN;
    let digest = Sha256::digest(&bytes[..body_end]);
    if digest.as_slice() != &bytes[body_end..] {
        return Err(ModelError::Checksum);
    }

    let mut matrices = meta.shapes.iter().map(|&(rows, cols)| {
        let raw = cur.take(rows * cols * 4)?;
        let data = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        Matrix::from_vec(rows, cols, data)
    });
    let w_in = matrices.next().unwrap()?;
    let w_out = matrices.next().unwrap()?;
    let docs = matrices.next().unwrap()?;

    EmbeddingModel::from_parts(meta.vocabulary, meta.params, w_in, w_out, docs, meta.doc_tags)
}

struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

struct Metadata {
    params: Hyperparams,
    vocabulary: Vocabulary,
    doc_tags: Vec<String>,
    shapes: [(usize, usize); 3],
}

impl Metadata {
    fn decode(bytes: &[u8]) -> Result<Self, ModelError> {
        let mut cur = Cursor::new(bytes);
        let mode_code = cur.u8()?;
        let mode = Mode::from_code(mode_code)
            .ok_or_else(|| ModelError::Metadata(format!("unknown mode code {mode_code}")))?;
        let params = Hyperparams {
            mode,
            vector_size: cur.usize()?,
            window: cur.usize()?,
            min_count: cur.u64()?,
            subsample_t: cur.f64()?,
            negative: cur.usize()?,
            epochs: cur.usize()?,
            alpha: cur.f64()?,
            alpha_min: cur.f64()?,
            dbow_train_words: cur.u8()? != 0,
            seed: cur.u64()?,
            workers: cur.usize()?,
        };

        let vocab_min_count = cur.u64()?;
        let vocab_t = cur.f64()?;
        let n_types = cur.usize()?;
        let mut counted = Vec::with_capacity(n_types.min(bytes.len()));
        for _ in 0..n_types {
            counted.push((cur.string()?, cur.u64()?));
        }
        let vocabulary = if counted.is_empty() {
            Vocabulary::empty(vocab_min_count, vocab_t)
        } else {
            Vocabulary::from_counts(counted, vocab_min_count, vocab_t)?
        };

        let n_tags = cur.usize()?;
        let mut doc_tags = Vec::with_capacity(n_tags.min(bytes.len()));
        for _ in 0..n_tags {
            doc_tags.push(cur.string()?);
        }

        let mut shapes = [(0, 0); 3];
        for shape in &mut shapes {
            *shape = (cur.usize()?, cur.usize()?);
        }
        if cur.pos != bytes.len() {
            return Err(ModelError::Metadata("unexpected bytes after metadata".into()));
        }
        Ok(Metadata { params, vocabulary, doc_tags, shapes })
    }
}

fn encode_metadata(model: &EmbeddingModel) -> Vec<u8> {
    let mut buf = Vec::new();
    let p = model.params();
    buf.push(p.mode.code());
    for v in [p.vector_size as u64, p.window as u64, p.min_count] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&p.subsample_t.to_le_bytes());
    for v in [p.negative as u64, p.epochs as u64] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&p.alpha.to_le_bytes());
    buf.extend_from_slice(&p.alpha_min.to_le_bytes());
    buf.push(u8::from(p.dbow_train_words));
    buf.extend_from_slice(&p.seed.to_le_bytes());
    buf.extend_from_slice(&(p.workers as u64).to_le_bytes());

    let vocab = model.vocabulary();
    buf.extend_from_slice(&vocab.min_count().to_le_bytes());
    buf.extend_from_slice(&vocab.subsample_t().to_le_bytes());
    buf.extend_from_slice(&(vocab.len() as u64).to_le_bytes());
    for entry in vocab.entries() {
        put_string(&mut buf, &entry.surface);
        buf.extend_from_slice(&entry.count.to_le_bytes());
    }

    buf.extend_from_slice(&(model.doc_tags().len() as u64).to_le_bytes());
    for tag in model.doc_tags() {
        put_string(&mut buf, tag);
    }

    for m in [model.w_in(), model.w_out(), model.docs()] {
        buf.extend_from_slice(&(m.rows() as u64).to_le_bytes());
        buf.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    }
    buf
}

fn put_string(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Cursor { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        let end = self.pos.checked_add(n).ok_or(ModelError::Truncated)?;
        let slice = self.bytes.get(self.pos..end).ok_or(ModelError::Truncated)?;
        self.pos = end;
        Ok(slice)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], ModelError> {
        Ok(self.take(N)?.try_into().expect("slice has length N"))
    }

    fn u8(&mut self) -> Result<u8, ModelError> {
        Ok(self.array::<1>()?[0])
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64, ModelError> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn usize(&mut self) -> Result<usize, ModelError> {
        usize::try_from(self.u64()?).map_err(|_| ModelError::Metadata("size overflow".into()))
    }

    fn f64(&mut self) -> Result<f64, ModelError> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn string(&mut self) -> Result<String, ModelError> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| ModelError::Metadata("string is not UTF-8".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_model() -> EmbeddingModel {
        let vocab = Vocabulary::build(["x", "y", "x", "z"], 1, 1e-3).unwrap();
        let mut p = Hyperparams::for_mode(Mode::Dmpv);
        p.vector_size = 2;
        p.window = 1;
        p.subsample_t = 0.123456789e-4;
        let w_in = Matrix::from_vec(4, 2, (0..8).map(|i| i as f32 * 0.1 - 0.3).collect()).unwrap();
        let w_out = Matrix::from_vec(3, 6, (0..18).map(|i| (i as f32).sin()).collect()).unwrap();
        let docs = Matrix::from_vec(2, 2, vec![1.5, -2.25, f32::MIN_POSITIVE, 3e-30]).unwrap();
        EmbeddingModel::from_parts(vocab, p, w_in, w_out, docs, vec!["a".into(), "ü".into()])
            .unwrap()
    }

    fn encode(model: &EmbeddingModel) -> Vec<u8> {
        let mut buf = Vec::new();
        write_model(model, &mut buf).unwrap();
        buf
    }

    #[test]
    fn round_trip_is_exact() {
        let model = tiny_model();
        let bytes = encode(&model);
        assert!(bytes.starts_with(MAGIC));
        let back = read_model(&bytes[..]).unwrap();
        assert_eq!(back, model);
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn wrong_magic() {
        let mut bytes = encode(&tiny_model());
        bytes[0] = b'X';
        assert!(matches!(read_model(&bytes[..]), Err(ModelError::BadMagic)));
        assert!(matches!(read_model(&b"VEC"[..]), Err(ModelError::BadMagic)));
    }

    #[test]
    fn wrong_version() {
        let mut bytes = encode(&tiny_model());
        bytes[MAGIC.len()] = 9;
        assert!(matches!(read_model(&bytes[..]), Err(ModelError::VersionMismatch(9))));
    }

    #[test]
    fn truncated_anywhere() {
        let bytes = encode(&tiny_model());
        // Mid-matrix, mid-checksum, and mid-metadata.
        for cut in [bytes.len() - 40, bytes.len() - 1, 30] {
            assert!(
                matches!(read_model(&bytes[..cut]), Err(ModelError::Truncated)),
                "cut at {cut}"
            );
        }
    }

    #[test]
    fn corrupted_payload() {
        let mut bytes = encode(&tiny_model());
        let n = bytes.len();
        bytes[n - 40] ^= 0x01;
        assert!(matches!(read_model(&bytes[..]), Err(ModelError::Checksum)));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        let model = tiny_model();
        save_model(&model, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), model);
    }
}
