//! The de-facto word2vec interchange formats.
//!
//! Both start with a `<rows> <dim>\n` header. Text rows are
//! `<token> <v1> ... <vd>\n`; binary rows are the token bytes, one space,
//! `dim` little-endian `f32` values and a trailing newline.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use super::{EmbeddingModel, Matrix, ModelError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VectorFormat {
    Text,
    Binary,
}

impl FromStr for VectorFormat {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" | "txt" => Ok(VectorFormat::Text),
            "binary" | "bin" => Ok(VectorFormat::Binary),
            other => Err(ModelError::BadHeader(format!("unknown vector format {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WhichVectors {
    Words,
    Docs,
}

/// Tokens in file order with one vector row each.
#[derive(Clone, Debug, PartialEq)]
pub struct WordVectors {
    pub tokens: Vec<String>,
    pub vectors: Matrix,
}

impl WordVectors {
    /// The model's input word vectors in vocabulary order.
    pub fn from_model(model: &EmbeddingModel) -> Self {
        let vocab = model.vocabulary();
        let tokens: Vec<String> = vocab.entries().iter().map(|e| e.surface.clone()).collect();
        let d = model.dim();
        let data = model.w_in().as_slice()[..tokens.len() * d].to_vec();
        let vectors = Matrix::from_vec(tokens.len(), d, data).expect("shape follows vocabulary");
        WordVectors { tokens, vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

pub fn load_word_vectors<P: AsRef<Path>>(
    path: P,
    format: VectorFormat,
) -> Result<WordVectors, ModelError> {
    read_word_vectors(BufReader::new(File::open(path)?), format)
}

pub fn read_word_vectors<R: BufRead>(
    mut reader: R,
    format: VectorFormat,
) -> Result<WordVectors, ModelError> {
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let (rows, dim) = parse_header(&header)?;
    match format {
        VectorFormat::Text => read_text_rows(reader, rows, dim),
        VectorFormat::Binary => read_binary_rows(reader, rows, dim),
    }
}

fn parse_header(line: &str) -> Result<(usize, usize), ModelError> {
    let bad = || ModelError::BadHeader(line.trim_end().to_owned());
    let mut parts = line.split_whitespace();
    let rows = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let dim: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    if parts.next().is_some() || dim == 0 {
        return Err(bad());
    }
    Ok((rows, dim))
}

fn read_text_rows<R: BufRead>(reader: R, rows: usize, dim: usize) -> Result<WordVectors, ModelError> {
    let mut tokens = Vec::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * dim);
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = tokens.len();
        if row == rows {
            return Err(ModelError::BadRow { row, reason: format!("more than {rows} rows") });
        }
        let mut parts = line.split_whitespace();
        let token = parts.next().expect("non-blank line has a token");
        let before = data.len();
        for part in parts {
            let x: f32 = part.parse().map_err(|_| ModelError::BadRow {
                row,
                reason: format!("unparseable value {part:?}"),
            })?;
            data.push(check_finite(x, row)?);
        }
        let got = data.len() - before;
        if got != dim {
            return Err(ModelError::BadRow { row, reason: format!("{got} values, expected {dim}") });
        }
        tokens.push(token.to_owned());
    }
    if tokens.len() != rows {
        return Err(ModelError::BadRow {
            row: tokens.len(),
            reason: format!("header declares {rows} rows, found {}", tokens.len()),
        });
    }
    Ok(WordVectors { tokens, vectors: Matrix::from_vec(rows, dim, data)? })
}

fn read_binary_rows<R: BufRead>(
    mut reader: R,
    rows: usize,
    dim: usize,
) -> Result<WordVectors, ModelError> {
    let mut tokens = Vec::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * dim);
    let mut raw = vec![0u8; dim * 4];
    for row in 0..rows {
        let eof = || ModelError::BadRow {
            row,
            reason: format!("header declares {rows} rows, file ends early"),
        };
        let mut token = Vec::new();
        loop {
            let mut byte = [0u8];
            if reader.read(&mut byte)? == 0 {
                return Err(eof());
            }
            match byte[0] {
                b'\n' if token.is_empty() => continue,
                b' ' => break,
                b => token.push(b),
            }
        }
        let token = String::from_utf8(token)
            .map_err(|_| ModelError::BadRow { row, reason: "token is not UTF-8".into() })?;
        reader.read_exact(&mut raw).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => eof(),
            _ => ModelError::Io(e),
        })?;
        for chunk in raw.chunks_exact(4) {
            let x = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            data.push(check_finite(x, row)?);
        }
        tokens.push(token);
    }
    Ok(WordVectors { tokens, vectors: Matrix::from_vec(rows, dim, data)? })
}

fn check_finite(x: f32, row: usize) -> Result<f32, ModelError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ModelError::BadRow { row, reason: "non-finite value".into() })
    }
}

/// Writes `tokens` with the first `tokens.len()` rows of `vectors`.
pub fn write_word_vectors<W: Write>(
    mut writer: W,
    tokens: &[String],
    vectors: &Matrix,
    format: VectorFormat,
) -> Result<(), ModelError> {
    if tokens.len() > vectors.rows() {
        return Err(ModelError::LengthMismatch(tokens.len(), vectors.rows()));
    }
    writeln!(writer, "{} {}", tokens.len(), vectors.cols())?;
    for (row, token) in tokens.iter().enumerate() {
        if token.is_empty() || token.contains(char::is_whitespace) {
            return Err(ModelError::BadRow {
                row,
                reason: format!("token {token:?} is empty or contains whitespace"),
            });
        }
        match format {
            VectorFormat::Text => {
                write!(writer, "{token}")?;
                for x in vectors.row(row) {
                    // Display for f32 prints the shortest string that parses
                    // back to the same value.
                    write!(writer, " {x}")?;
                }
                writeln!(writer)?;
            }
            VectorFormat::Binary => {
                writer.write_all(token.as_bytes())?;
                writer.write_all(b" ")?;
                for x in vectors.row(row) {
                    writer.write_all(&x.to_le_bytes())?;
                }
                writer.write_all(b"\n")?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

/// Writes word vectors (vocabulary order) or document vectors (tag order) in
/// the text interchange format.
pub fn export_text<P: AsRef<Path>>(
    model: &EmbeddingModel,
    which: WhichVectors,
    path: P,
) -> Result<(), ModelError> {
    let (tokens, matrix): (Vec<String>, &Matrix) = match which {
        WhichVectors::Words => (
            model.vocabulary().entries().iter().map(|e| e.surface.clone()).collect(),
            model.w_in(),
        ),
        WhichVectors::Docs => {
            if model.doc_tags().is_empty() {
                return Err(ModelError::NoDocVectors);
            }
            (model.doc_tags().to_vec(), model.docs())
        }
    };
    let writer = BufWriter::new(File::create(path)?);
    write_word_vectors(writer, &tokens, matrix, VectorFormat::Text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(bytes: &[u8], format: VectorFormat) -> Result<WordVectors, ModelError> {
        read_word_vectors(bytes, format)
    }

    #[test]
    fn text_example() {
        let wv = parse(b"2 3\na 1 0 0\nb 0 1 0", VectorFormat::Text).unwrap();
        assert_eq!(wv.tokens, ["a", "b"]);
        assert_eq!(wv.dim(), 3);
        assert_eq!(wv.vectors.row(1), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn row_count_mismatch() {
        let text = b"5 2\na 1 0\nb 0 1\nc 1 1\nd 0 0\n";
        assert!(matches!(parse(text, VectorFormat::Text), Err(ModelError::BadRow { row: 4, .. })));
        assert!(parse(b"1 2\na 1 0\nb 0 1\n", VectorFormat::Text).is_err());
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(parse(b"two 3\n", VectorFormat::Text), Err(ModelError::BadHeader(_))));
        assert!(matches!(parse(b"1 0\n", VectorFormat::Text), Err(ModelError::BadHeader(_))));
        assert!(matches!(
            parse(b"1 3\na 1 0\n", VectorFormat::Text),
            Err(ModelError::BadRow { row: 0, .. })
        ));
        assert!(parse(b"1 2\na 1 NaN\n", VectorFormat::Text).is_err());
        assert!(parse(b"1 2\na 1 inf\n", VectorFormat::Text).is_err());
    }

    #[test]
    fn binary_truncated() {
        let mut bytes = b"2 2\na ".to_vec();
        bytes.extend_from_slice(&1f32.to_le_bytes());
        bytes.extend_from_slice(&2f32.to_le_bytes());
        bytes.extend_from_slice(b"\nb ");
        bytes.extend_from_slice(&3f32.to_le_bytes());
        assert!(matches!(parse(&bytes, VectorFormat::Binary), Err(ModelError::BadRow { row: 1, .. })));
    }

    #[test]
    fn binary_rejects_nan() {
        let mut bytes = b"1 1\na ".to_vec();
        bytes.extend_from_slice(&f32::NAN.to_le_bytes());
        assert!(parse(&bytes, VectorFormat::Binary).is_err());
    }

    #[test]
    fn writer_rejects_whitespace_tokens() {
        let m = Matrix::zeros(1, 1);
        let err = write_word_vectors(Vec::new(), &["a b".into()], &m, VectorFormat::Text);
        assert!(err.is_err());
    }

    proptest! {
        #[test]
        fn text_and_binary_agree(
            rows in proptest::collection::vec(proptest::collection::vec(-1e6f32..1e6, 4), 1..20)
        ) {
            let tokens: Vec<String> = (0..rows.len()).map(|i| format!("w{i}")).collect();
            let m = Matrix::from_vec(rows.len(), 4, rows.concat()).unwrap();
            let mut text = Vec::new();
            let mut bin = Vec::new();
            write_word_vectors(&mut text, &tokens, &m, VectorFormat::Text).unwrap();
            write_word_vectors(&mut bin, &tokens, &m, VectorFormat::Binary).unwrap();
            let a = parse(&text, VectorFormat::Text).unwrap();
            let b = parse(&bin, VectorFormat::Binary).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(&a.vectors, &m);
        }
    }
}
