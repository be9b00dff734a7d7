//! Text trajectory checkpoints.
//!
//! ```text
//! social-sampling-trajectory v1
//! n <nodes> m <alphabet>
//! <t> <rng word position> <Q row-major, n·m values>
//! ...
//! ```
//!
//! Values are written in shortest round-trip decimal form, so reading a
//! record back restores the exact bits of `Q(t)`.

use std::io::{self, BufRead, Write};

use crate::linalg::Matrix;

const MAGIC: &str = "social-sampling-trajectory v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub t: u64,
    pub rng_word_pos: u128,
    pub q: Matrix,
}

pub struct TrajectoryWriter<W: Write> {
    out: W,
    shape: (usize, usize),
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(mut out: W, nodes: usize, alphabet: usize) -> io::Result<Self> {
        writeln!(out, "{MAGIC}")?;
        writeln!(out, "n {nodes} m {alphabet}")?;
        Ok(Self {
            out,
            shape: (nodes, alphabet),
        })
    }

    pub fn write(&mut self, cp: &Checkpoint) -> io::Result<()> {
        if (cp.q.rows(), cp.q.cols()) != self.shape {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "checkpoint shape mismatch"));
        }
        write!(self.out, "{} {}", cp.t, cp.rng_word_pos)?;
        for x in cp.q.as_slice() {
            write!(self.out, " {x:?}")?;
        }
        writeln!(self.out)
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

pub struct TrajectoryReader;

impl TrajectoryReader {
    pub fn read<R: BufRead>(input: R) -> io::Result<Vec<Checkpoint>> {
        let bad = |line: usize, msg: &str| io::Error::new(io::ErrorKind::InvalidData, format!("line {line}: {msg}"));
        let mut lines = input.lines();
        let magic = lines.next().transpose()?.unwrap_or_default();
        if magic.trim() != MAGIC {
            return Err(bad(1, "not a trajectory file"));
        }
        let header = lines.next().transpose()?.unwrap_or_default();
        let toks: Vec<&str> = header.split_whitespace().collect();
        let (n, m) = match toks.as_slice() {
            ["n", n, "m", m] => (
                n.parse::<usize>().map_err(|_| bad(2, "bad node count"))?,
                m.parse::<usize>().map_err(|_| bad(2, "bad alphabet size"))?,
            ),
            _ => return Err(bad(2, "expected `n <nodes> m <alphabet>`")),
        };
        let mut out = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            let lineno = k + 3;
            if line.trim().is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            let t = toks
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(lineno, "bad round index"))?;
            let rng_word_pos = toks
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(lineno, "bad rng position"))?;
            let values: Vec<f64> = toks
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad(lineno, "bad estimate value"))?;
            if values.len() != n * m {
                return Err(bad(lineno, "wrong number of estimate values"));
            }
            out.push(Checkpoint {
                t,
                rng_word_pos,
                q: Matrix::from_row_major(n, m, values),
            });
        }
        Ok(out)
    }
}
