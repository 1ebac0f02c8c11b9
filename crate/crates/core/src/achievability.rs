//! Concrete codes for classifier outputs and the achievable points they give.
//!
//! A classifier followed by a lossless code for its decisions reproduces the
//! classifier's accuracy at the code's rate. The codes here are a fixed-length
//! code, a Huffman code, and fixed-length or Huffman codes over blocks of `n`
//! decisions.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use num_bigint::BigUint;

use crate::dms::Pmf;
use crate::error::{domain, Error, Result};

/// Largest tuple alphabet [`block_huffman_rate`] will build.
pub const BLOCK_ALPHABET_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeEntry {
    pub label: usize,
    pub name: String,
    pub bits: String,
}

impl CodeEntry {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Prefix-free code over a subset of labels, sorted by label.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub entries: Vec<CodeEntry>,
    /// Expected codeword length in bits under the source it was built for.
    pub avg_length: f64,
}

impl Codebook {
    pub fn lengths(&self) -> Vec<usize> {
        self.entries.iter().map(CodeEntry::len).collect()
    }

    /// `Σ 2^-len` as an exact fraction `numerator / 2^max_len`.
    pub fn kraft_sum(&self) -> (BigUint, usize) {
        let max_len = self.entries.iter().map(CodeEntry::len).max().unwrap_or(0);
        let num = self
            .entries
            .iter()
            .map(|e| BigUint::from(1u8) << (max_len - e.len()))
            .sum();
        (num, max_len)
    }

    /// Kraft sum equals one exactly.
    pub fn is_complete(&self) -> bool {
        let (num, max_len) = self.kraft_sum();
        num == BigUint::from(1u8) << max_len
    }

    pub fn is_prefix_free(&self) -> bool {
        let mut words: Vec<&str> = self.entries.iter().map(|e| e.bits.as_str()).collect();
        words.sort_unstable();
        // after sorting, a prefix sits immediately before some word it prefixes
        words.windows(2).all(|w| !w[1].starts_with(w[0]))
    }

    /// One `label<TAB>bitstring` line per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}", e.name, e.bits);
        }
        out
    }
}

/// `ceil(log2 K)` by integer bit length; `K = 1` needs no bits.
pub fn fixed_length_rate(k: u64) -> u32 {
    if k <= 1 {
        0
    } else {
        u64::BITS - (k - 1).leading_zeros()
    }
}

fn ceil_log2_big(n: &BigUint) -> u64 {
    if *n <= BigUint::from(1u8) {
        0
    } else {
        (n - 1u8).bits()
    }
}

/// Bits per symbol of a fixed-length code over blocks of `n` symbols, as the
/// exact ratio `(ceil(log2 K^n), n)`.
pub fn block_fixed_bits(k: u64, n: u32) -> Result<(u64, u32)> {
    if k == 0 || n == 0 {
        return Err(domain(format!(
            "block code needs K >= 1 and n >= 1, got K={k} n={n}"
        )));
    }
    Ok((ceil_log2_big(&BigUint::from(k).pow(n)), n))
}

/// `ceil(log2 K^n) / n`.
pub fn block_fixed_rate(k: u64, n: u32) -> Result<f64> {
    let (bits, n) = block_fixed_bits(k, n)?;
    Ok(bits as f64 / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct NodeKey {
    weight: f64,
    min_label: usize,
}

impl Eq for NodeKey {}

impl Ord for NodeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.min_label.cmp(&other.min_label))
    }
}

impl PartialOrd for NodeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Huffman codeword lengths for positive weights, indexed like `weights`.
///
/// Merges the two lightest nodes; equal weights go to the node holding the
/// smallest original index.
fn huffman_lengths(weights: &[f64]) -> Vec<usize> {
    let n = weights.len();
    if n == 1 {
        return vec![0];
    }
    // nodes 0..n are leaves, later ones internal
    let mut parent = vec![usize::MAX; 2 * n - 1];
    let mut heap: BinaryHeap<Reverse<(NodeKey, usize)>> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            Reverse((
                NodeKey {
                    weight: w,
                    min_label: i,
                },
                i,
            ))
        })
        .collect();
    let mut next = n;
    while heap.len() > 1 {
        let Reverse((a, ia)) = heap.pop().expect("two nodes");
        let Reverse((b, ib)) = heap.pop().expect("two nodes");
        parent[ia] = next;
        parent[ib] = next;
        let key = NodeKey {
            weight: a.weight + b.weight,
            min_label: a.min_label.min(b.min_label),
        };
        heap.push(Reverse((key, next)));
        next += 1;
    }
    // parents are created after children, so depths resolve top-down
    let mut depth = vec![0usize; 2 * n - 1];
    for v in (0..2 * n - 2).rev() {
        depth[v] = depth[parent[v]] + 1;
    }
    depth.truncate(n);
    depth
}

/// Canonical codewords for the given lengths. Entries are ordered by
/// `(length, index)` and receive lexicographically increasing patterns.
/// Returns the bit strings indexed like `lengths`.
pub fn canonical_code(lengths: &[usize]) -> Result<Vec<String>> {
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by_key(|&i| (lengths[i], i));
    let max_len = lengths.iter().copied().max().unwrap_or(0);
    let kraft: BigUint = lengths
        .iter()
        .map(|&l| BigUint::from(1u8) << (max_len - l))
        .sum();
    if kraft > BigUint::from(1u8) << max_len {
        return Err(domain("codeword lengths violate the Kraft inequality"));
    }
    let mut out = vec![String::new(); lengths.len()];
    let mut code: Vec<u8> = Vec::new();
    let mut first = true;
    for &i in &order {
        if !first {
            increment(&mut code);
        }
        first = false;
        code.resize(lengths[i], 0);
        out[i] = code
            .iter()
            .map(|&b| if b == 1 { '1' } else { '0' })
            .collect();
    }
    Ok(out)
}

fn increment(bits: &mut [u8]) {
    for b in bits.iter_mut().rev() {
        if *b == 0 {
            *b = 1;
            return;
        }
        *b = 0;
    }
}

/// Huffman code for the labels with positive probability.
pub fn huffman_code(source: &Pmf) -> Result<Codebook> {
    let support: Vec<usize> = (0..source.len())
        .filter(|&i| source.probs()[i] > 0.0)
        .collect();
    if support.is_empty() {
        return Err(domain("no label has positive probability"));
    }
    let weights: Vec<f64> = support.iter().map(|&i| source.probs()[i]).collect();
    let lengths = huffman_lengths(&weights);
    let bits = canonical_code(&lengths)?;
    let avg_length = weights
        .iter()
        .zip(&lengths)
        .map(|(p, &l)| p * l as f64)
        .sum();
    let entries = support
        .iter()
        .zip(bits)
        .map(|(&label, bits)| CodeEntry {
            label,
            name: source.label(label),
            bits,
        })
        .collect();
    Ok(Codebook {
        entries,
        avg_length,
    })
}

/// Average Huffman length per symbol when coding blocks of `n` independent
/// symbols.
pub fn block_huffman_rate(source: &Pmf, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(domain("block size must be >= 1"));
    }
    let support: Vec<f64> = source
        .probs()
        .iter()
        .copied()
        .filter(|&p| p > 0.0)
        .collect();
    let size = BigUint::from(support.len()).pow(n);
    if size > BigUint::from(BLOCK_ALPHABET_LIMIT) {
        return Err(Error::AlphabetTooLarge {
            size: size.to_string(),
            limit: BLOCK_ALPHABET_LIMIT,
        });
    }
    let mut tuples = vec![1.0f64];
    for _ in 0..n {
        tuples = tuples
            .iter()
            .flat_map(|&w| support.iter().map(move |&p| w * p))
            .collect();
    }
    let lengths = huffman_lengths(&tuples);
    let avg: f64 = tuples
        .iter()
        .zip(&lengths)
        .map(|(p, &l)| p * l as f64)
        .sum();
    Ok(avg / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Fixed,
    Huffman,
    BlockFixed,
    BlockHuffman,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Fixed => "fixed",
            Method::Huffman => "huffman",
            Method::BlockFixed => "block-fixed",
            Method::BlockHuffman => "block-huffman",
        }
    }
}

/// Operating point of "classify, then losslessly code the decision".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AchievablePoint {
    pub rate: f64,
    pub accuracy: f64,
    pub method: Method,
    pub block_size: u32,
}

/// The decoder recovers the classifier's decision exactly, so the point has
/// the classifier's accuracy and the code's rate.
pub fn classify_then_code_point(
    classifier_accuracy: f64,
    coding_rate: f64,
    method: Method,
    block_size: u32,
) -> Result<AchievablePoint> {
    if !(0.0..=1.0).contains(&classifier_accuracy) {
        return Err(domain(format!(
            "accuracy {classifier_accuracy} outside [0, 1]"
        )));
    }
    if !coding_rate.is_finite() || coding_rate < 0.0 {
        return Err(domain(format!("rate {coding_rate} is not >= 0")));
    }
    if block_size == 0 {
        return Err(domain("block size must be >= 1"));
    }
    Ok(AchievablePoint {
        rate: coding_rate,
        accuracy: classifier_accuracy,
        method,
        block_size,
    })
}
