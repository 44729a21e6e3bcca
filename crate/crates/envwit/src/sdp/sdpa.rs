//! Sparse SDPA (".dat-s") export and import.
//!
//! Grammar written and accepted here, in order:
//!
//! ```text
//! *  comment lines (also `"`), any number
//! m                          number of constraints
//! nblocks                    number of PSD blocks
//! s_1 s_2 … s_nblocks        block sizes
//! b_1 b_2 … b_m              constraint right-hand sides
//! matno blkno i j value      one line per nonzero, repeated
//! ```
//!
//! Entry indices are 1-based, local to their block, upper triangle (`i ≤ j`);
//! `matno 0` is the objective and `matno k ≥ 1` is constraint `k`. Because
//! SDPA-format solvers minimize while this crate maximizes, matrix 0 stores
//! the *negated* objective −F; the flip is recorded in the file comments and
//! undone on import. Values are printed in shortest round-trip decimal form,
//! so an export/import cycle reproduces the problem exactly.
//!
//! The importer is mildly liberal: it accepts `"`-style comments, braces and
//! commas in the rhs line (used by some writers), trailing annotations after
//! header numbers, entries with `i > j`, and `-1` block sizes (a 1×1
//! "diagonal" block is a 1×1 PSD block). Larger diagonal blocks are rejected.
//! Comments deeper in the file are skipped too.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use super::problem::{SdpConstraint, SdpProblem, SparseHermitian};
use crate::{Error, Result, ZERO_TOL};

/// Serializes a real-data problem in sparse SDPA form to `destination`.
pub fn export_sdpa(problem: &SdpProblem, destination: impl AsRef<Path>) -> Result<()> {
    let mut file = fs::File::create(destination)?;
    write_sdpa(problem, &mut file)
}

/// Serializes a real-data problem in sparse SDPA form to any writer.
pub fn write_sdpa(problem: &SdpProblem, out: &mut dyn Write) -> Result<()> {
    let issues = problem.validate();
    if !issues.is_empty() {
        return Err(Error::InvalidProblem { issues });
    }
    let max_imag = problem.max_imag();
    if max_imag > ZERO_TOL {
        return Err(Error::ComplexNotRealified { max_imag });
    }

    let layout = problem.layout();
    let mut text = String::new();
    text.push_str("* sparse SDPA export: maximize Tr[F.X] s.t. Tr[C_k.X] = b_k, X >= 0\n");
    text.push_str("* SDPA-format solvers minimize, so matrix 0 below stores -F;\n");
    text.push_str("* negate the reported objective value to recover the bound.\n");
    if !problem.metadata.description.is_empty() {
        let _ = writeln!(text, "* {}", problem.metadata.description);
    }

    let _ = writeln!(text, "{}", problem.constraints.len());
    let _ = writeln!(text, "{}", problem.blocks.len());
    let sizes: Vec<String> = problem.blocks.iter().map(|b| b.to_string()).collect();
    let _ = writeln!(text, "{}", sizes.join(" "));
    let rhs: Vec<String> = problem.constraints.iter().map(|c| format!("{:?}", c.rhs)).collect();
    let _ = writeln!(text, "{}", rhs.join(" "));

    let mut emit = |matno: usize, matrix: &SparseHermitian, negate: bool| {
        let mut lines: Vec<(usize, usize, usize, f64)> = matrix
            .upper_triangle()
            .into_iter()
            .map(|(r, c, v)| {
                let (blk, lr) = layout.locate(r);
                let (_, lc) = layout.locate(c);
                let value = if negate { -v.re } else { v.re };
                (blk + 1, lr + 1, lc + 1, value)
            })
            .collect();
        lines.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        for (blk, i, j, v) in lines {
            if v != 0.0 {
                let _ = writeln!(text, "{matno} {blk} {i} {j} {v:?}");
            }
        }
    };

    emit(0, &problem.objective, true);
    for (k, cst) in problem.constraints.iter().enumerate() {
        emit(k + 1, &cst.matrix, false);
    }

    out.write_all(text.as_bytes())?;
    Ok(())
}

/// Reads a sparse SDPA file back into a problem, undoing the matrix-0 sign
/// flip. Comments are skipped; metadata on the result is left empty.
pub fn import_sdpa(source: impl AsRef<Path>) -> Result<SdpProblem> {
    parse_sdpa(&fs::read_to_string(source)?)
}

fn bad(line_no: usize, message: impl std::fmt::Display) -> Error {
    Error::parse("sdpa", format!("line {line_no}: {message}"))
}

pub(crate) fn parse_sdpa(text: &str) -> Result<SdpProblem> {
    // Keep non-blank, non-comment lines, numbered for error reporting.
    let mut data = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('*') || line.starts_with('"') {
            continue;
        }
        data.push((idx + 1, line));
    }
    if data.len() < 4 {
        return Err(Error::parse("sdpa", "file ends before the rhs line"));
    }

    // Header lines tolerate trailing annotations ("3 = mDIM"): numeric
    // tokens are consumed greedily and the remainder is ignored.
    let leading_numbers = |line: &str| -> Vec<f64> {
        line.split(|c: char| c.is_whitespace() || c == ',' || c == '{' || c == '}')
            .filter(|t| !t.is_empty())
            .map_while(|t| t.parse::<f64>().ok())
            .collect()
    };
    let leading_integer = |(line_no, line): (usize, &str), what: &str| -> Result<usize> {
        let nums = leading_numbers(line);
        match nums.first() {
            Some(&v) if v >= 0.0 && v.fract() == 0.0 => Ok(v as usize),
            _ => Err(bad(line_no, format!("expected {what}, found {line:?}"))),
        }
    };

    let m = leading_integer(data[0], "the constraint count")?;
    let nblocks = leading_integer(data[1], "the block count")?;

    let (sizes_no, sizes_line) = data[2];
    let size_tokens = leading_numbers(sizes_line);
    if size_tokens.len() < nblocks {
        return Err(bad(sizes_no, format!("expected {nblocks} block sizes")));
    }
    let mut blocks = Vec::with_capacity(nblocks);
    for &s in &size_tokens[..nblocks] {
        if s == -1.0 || (s >= 1.0 && s.fract() == 0.0) {
            blocks.push(s.abs() as usize);
        } else if s < 0.0 {
            return Err(bad(sizes_no, format!("diagonal blocks ({s}) are not supported")));
        } else {
            return Err(bad(sizes_no, format!("invalid block size {s}")));
        }
    }

    let (rhs_no, rhs_line) = data[3];
    let rhs = leading_numbers(rhs_line);
    if rhs.len() < m {
        return Err(bad(rhs_no, format!("expected {m} right-hand sides, found {}", rhs.len())));
    }
    let rhs = &rhs[..m];

    let offsets: Vec<usize> = blocks
        .iter()
        .scan(0usize, |acc, &b| {
            let here = *acc;
            *acc += b;
            Some(here)
        })
        .collect();
    let total: usize = blocks.iter().sum();

    let mut entry_lists: Vec<Vec<(usize, usize, Complex64)>> = vec![Vec::new(); m + 1];
    for &(line_no, line) in &data[4..] {
        let tokens: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.len() < 5 {
            return Err(bad(line_no, "expected `matno blkno i j value`"));
        }
        let field = |k: usize, what: &str| -> Result<usize> {
            tokens[k].parse::<usize>().map_err(|_| bad(line_no, format!("bad {what} {:?}", tokens[k])))
        };
        let matno = field(0, "matrix number")?;
        let blkno = field(1, "block number")?;
        let i = field(2, "row index")?;
        let j = field(3, "column index")?;
        let value: f64 = tokens[4]
            .parse()
            .map_err(|_| bad(line_no, format!("bad value {:?}", tokens[4])))?;

        if matno > m {
            return Err(bad(line_no, format!("matrix {matno} exceeds constraint count {m}")));
        }
        if blkno == 0 || blkno > nblocks {
            return Err(bad(line_no, format!("block {blkno} out of range 1..={nblocks}")));
        }
        let dim = blocks[blkno - 1];
        if i == 0 || j == 0 || i > dim || j > dim {
            return Err(bad(line_no, format!("entry ({i},{j}) outside {dim}x{dim} block {blkno}")));
        }
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let (r, c) = (offsets[blkno - 1] + lo - 1, offsets[blkno - 1] + hi - 1);
        let signed = if matno == 0 { -value } else { value };
        entry_lists[matno].push((r, c, Complex64::new(signed, 0.0)));
        if r != c {
            entry_lists[matno].push((c, r, Complex64::new(signed, 0.0)));
        }
    }

    let mut matrices = entry_lists
        .into_iter()
        .map(|entries| SparseHermitian::from_entries(total, entries));
    let objective = matrices.next().expect("list has m+1 slots");
    let constraints = matrices
        .zip(rhs)
        .map(|(matrix, &rhs)| SdpConstraint { matrix, rhs })
        .collect();

    Ok(SdpProblem::new(blocks, objective, constraints))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::sdp::solve::{solve, SolverConfig};
    use approx::assert_abs_diff_eq;

    fn real(entries: Vec<(usize, usize, f64)>, dim: usize) -> SparseHermitian {
        SparseHermitian::from_entries(
            dim,
            entries.into_iter().map(|(r, c_, v)| (r, c_, c(v, 0.0))).collect(),
        )
    }

    fn toy() -> SdpProblem {
        let obj = real(vec![(0, 0, 1.0)], 2);
        let tr = real(vec![(0, 0, 1.0), (1, 1, 1.0)], 2);
        SdpProblem::new(vec![2], obj, vec![SdpConstraint { matrix: tr, rhs: 1.0 }])
    }

    fn render(problem: &SdpProblem) -> String {
        let mut buf = Vec::new();
        write_sdpa(problem, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn toy_problem_prints_the_expected_lines() {
        let text = render(&toy());
        let data: Vec<&str> =
            text.lines().filter(|l| !l.starts_with('*') && !l.is_empty()).collect();
        assert_eq!(data[0], "1");
        assert_eq!(data[1], "1");
        assert_eq!(data[2], "2");
        assert_eq!(data[3], "1.0");
        // The maximize→minimize flip lands the +1 objective entry as −1.
        assert_eq!(data[4], "0 1 1 1 -1.0");
        assert!(data.contains(&"1 1 1 1 1.0"));
        assert!(data.contains(&"1 1 2 2 1.0"));
    }

    #[test]
    fn round_trip_is_exact() {
        let obj = real(vec![(0, 0, 0.125), (0, 1, -0.7), (1, 0, -0.7), (3, 3, 2.0)], 4);
        let c1 = real(vec![(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0), (3, 3, 1.0)], 4);
        let c2 = real(vec![(2, 3, 0.1 + 0.2), (3, 2, 0.1 + 0.2)], 4);
        let mut p = SdpProblem::new(
            vec![2, 2],
            obj,
            vec![
                SdpConstraint { matrix: c1, rhs: 1.0 },
                SdpConstraint { matrix: c2, rhs: -0.25 },
            ],
        );
        p.metadata.description = "round-trip fixture".to_string();

        let back = parse_sdpa(&render(&p)).unwrap();
        assert_eq!(back.blocks, p.blocks);
        assert_eq!(back.constraints.len(), p.constraints.len());
        for (a, b) in back.constraints.iter().zip(&p.constraints) {
            assert_eq!(a.rhs, b.rhs);
            assert_eq!(a.matrix.upper_triangle(), b.matrix.upper_triangle());
        }
        assert_eq!(back.objective.upper_triangle(), p.objective.upper_triangle());
    }

    #[test]
    fn exported_file_round_trips_through_disk_and_solver() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.dat-s");
        let p = toy();
        export_sdpa(&p, &path).unwrap();
        let back = import_sdpa(&path).unwrap();
        let a = solve(&p, &SolverConfig::default()).unwrap();
        let b = solve(&back, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(a.value.unwrap(), b.value.unwrap(), epsilon = 1e-9);
        assert_abs_diff_eq!(b.value.unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn liberal_input_variants_are_accepted() {
        let text = r#"* leading comment
" another comment style
2 = mDIM
2 = nBLOCK
2 -1
{1.0, 0.5}
0 1 2 1 -3.0
1 1 1 1 1.0
1 1 2 2 1.0
1 2 1 1 1.0
2 2 1 1 1.0
"#;
        let p = parse_sdpa(text).unwrap();
        assert_eq!(p.blocks, vec![2, 1]);
        assert_eq!(p.constraints.len(), 2);
        assert_eq!(p.constraints[0].rhs, 1.0);
        assert_eq!(p.constraints[1].rhs, 0.5);
        // Entry given below the diagonal lands in the upper triangle,
        // mirrored, with the objective sign restored.
        let tri = p.objective.upper_triangle();
        assert_eq!(tri, vec![(0, 1, c(3.0, 0.0))]);
        assert!(p.validate().is_empty());
    }

    #[test]
    fn genuine_diagonal_blocks_are_rejected() {
        let text = "1\n1\n-3\n1.0\n1 1 1 1 1.0\n";
        let err = parse_sdpa(text).unwrap_err();
        assert!(err.to_string().contains("diagonal blocks"), "{err}");
    }

    #[test]
    fn out_of_range_entries_are_rejected_with_line_numbers() {
        let text = "1\n1\n2\n1.0\n1 1 3 3 1.0\n";
        let err = parse_sdpa(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 5"), "{msg}");
        assert!(msg.contains("outside"), "{msg}");
    }

    #[test]
    fn complex_problems_cannot_be_exported() {
        let obj = SparseHermitian::from_entries(2, vec![(0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0))]);
        let p = SdpProblem::new(vec![2], obj, vec![]);
        let mut buf = Vec::new();
        let err = write_sdpa(&p, &mut buf).unwrap_err();
        assert!(matches!(err, Error::ComplexNotRealified { .. }), "{err}");
    }
}
