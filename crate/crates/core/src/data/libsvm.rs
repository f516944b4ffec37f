use std::fmt::Write as _;
use std::io::BufRead;

use super::DataError;

/// One labelled sparse row. `features` holds `(index, value)` pairs with strictly increasing 1-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub label: f64,
    pub features: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    /// Largest feature index seen, 0 for an empty set.
    pub max_index: usize,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn parse_line(text: &str, line: usize) -> Result<Sample, DataError> {
    let err = |message: String| DataError::Parse { line, message };
    let mut tokens = text.split_whitespace();
    let label_tok = tokens.next().expect("caller skips blank lines");
    let label: f64 = label_tok
        .parse()
        .map_err(|_| err(format!("bad label {label_tok:?}")))?;
    if !label.is_finite() {
        return Err(err(format!("non-finite label {label_tok:?}")));
    }
    let mut features = Vec::new();
    let mut last = 0usize;
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| err(format!("expected index:value, found {tok:?}")))?;
        let idx: usize = idx.parse().map_err(|_| err(format!("bad index in {tok:?}")))?;
        if idx == 0 {
            return Err(err(format!("indices are 1-based, found {tok:?}")));
        }
        if idx <= last {
            return Err(err(format!("index {idx} does not increase past {last}")));
        }
        let val: f64 = val.parse().map_err(|_| err(format!("bad value in {tok:?}")))?;
        if !val.is_finite() {
            return Err(err(format!("non-finite value in {tok:?}")));
        }
        features.push((idx, val));
        last = idx;
    }
    Ok(Sample { label, features })
}

/// Reads `label idx:val ...` lines. Blank lines and lines starting with `#` are skipped.
pub fn parse_libsvm<R: BufRead>(input: R) -> Result<SampleSet, DataError> {
    let mut set = SampleSet::default();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let sample = parse_line(trimmed, i + 1)?;
        if let Some(&(idx, _)) = sample.features.last() {
            set.max_index = set.max_index.max(idx);
        }
        set.samples.push(sample);
    }
    Ok(set)
}

/// Writes one line per sample using shortest round-trip float formatting.
pub fn to_libsvm_string(set: &SampleSet) -> String {
    let mut out = String::new();
    for s in &set.samples {
        write!(out, "{}", s.label).unwrap();
        for (idx, val) in &s.features {
            write!(out, " {idx}:{val}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line() {
        let set = parse_libsvm("1 1:0.5 3:2.0".as_bytes()).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.samples[0].label, 1.0);
        assert_eq!(set.samples[0].features, vec![(1, 0.5), (3, 2.0)]);
        assert_eq!(set.max_index, 3);
    }

    #[test]
    fn empty_input() {
        let set = parse_libsvm("".as_bytes()).unwrap();
        assert!(set.is_empty());
        assert_eq!(set.max_index, 0);
    }

    #[test]
    fn non_increasing_index() {
        match parse_libsvm("1 3:1 2:1".as_bytes()) {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_blank_lines_and_line_numbers() {
        let text = "# header\n\n+1 2:1\n-1 1:nan\n";
        match parse_libsvm(text.as_bytes()) {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let ok = parse_libsvm("# c\n+1 2:1\n\n-1\n".as_bytes()).unwrap();
        assert_eq!(ok.len(), 2);
        assert!(ok.samples[1].features.is_empty());
    }

    #[test]
    fn malformed_tokens() {
        for bad in ["x 1:1", "1 1-1", "1 0:1", "1 a:1", "1 1:b", "1 1:1 1:2", "inf 1:1"] {
            assert!(parse_libsvm(bad.as_bytes()).is_err(), "{bad}");
        }
    }
}
