//! Flat-file formats.
//!
//! Ratings: one `user<TAB>item<TAB>rating` record per line. Social ties: one
//! `from<TAB>to` record per line. In both, lines starting with `#` and blank
//! lines are ignored. Labels get dense indices in order of first appearance,
//! ratings file first, so users that appear only in the ties file come after
//! every rating user.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::evaluation::{reports_to_json, EvalReport};
use crate::factorization::FactorModel;
use crate::srn::{ItemId, Labels, RatingsTable, SocialGraph, SocialRatingNetwork, UserId};

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Yields `(line number, fields)` for every record line.
fn records<'a, R: BufRead + 'a>(
    input: R,
    source: &'a Path,
) -> impl Iterator<Item = Result<(usize, Vec<String>)>> + 'a {
    input.lines().enumerate().filter_map(move |(i, line)| {
        let lineno = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(parse_error(source, lineno, e.to_string()))),
        };
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            return None;
        }
        Some(Ok((lineno, line.split('\t').map(str::to_owned).collect())))
    })
}

fn label<'a>(field: &'a str, source: &Path, lineno: usize, what: &str) -> Result<&'a str> {
    let trimmed = field.trim();
    if trimmed.is_empty() {
        return Err(parse_error(source, lineno, format!("empty {what} label")));
    }
    Ok(trimmed)
}

/// Reads a ratings file, extending `users` and `items` with new labels. The
/// table covers `users.len() x items.len()` afterwards.
pub fn read_ratings<R: BufRead>(
    input: R,
    source: &Path,
    users: &mut Labels,
    items: &mut Labels,
) -> Result<RatingsTable> {
    let mut entries = Vec::new();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for record in records(input, source) {
        let (lineno, fields) = record?;
        if fields.len() != 3 {
            return Err(parse_error(
                source,
                lineno,
                format!(
                    "expected user<TAB>item<TAB>rating, found {} field(s)",
                    fields.len()
                ),
            ));
        }
        let user = users.intern(label(&fields[0], source, lineno, "user")?);
        let item = items.intern(label(&fields[1], source, lineno, "item")?);
        let value: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|e| parse_error(source, lineno, format!("bad rating {:?}: {e}", fields[2])))?;
        if !value.is_finite() || value < 0.0 {
            return Err(parse_error(
                source,
                lineno,
                format!("rating {value} must be finite and non-negative"),
            ));
        }
        if let Some(first) = seen.insert((user, item), lineno) {
            return Err(parse_error(
                source,
                lineno,
                format!(
                    "duplicate rating for ({}, {}), first given on line {first}",
                    fields[0].trim(),
                    fields[1].trim()
                ),
            ));
        }
        entries.push((user, item, value));
    }
    RatingsTable::from_entries(users.len(), items.len(), entries)
}

/// Reads a ties file, extending `users` with new labels. The graph covers
/// `users.len()` users afterwards.
pub fn read_edges<R: BufRead>(input: R, source: &Path, users: &mut Labels) -> Result<SocialGraph> {
    let mut edges = Vec::new();
    for record in records(input, source) {
        let (lineno, fields) = record?;
        if fields.len() != 2 {
            return Err(parse_error(
                source,
                lineno,
                format!("expected from<TAB>to, found {} field(s)", fields.len()),
            ));
        }
        let from = label(&fields[0], source, lineno, "user")?;
        let to = label(&fields[1], source, lineno, "user")?;
        if from == to {
            return Err(parse_error(
                source,
                lineno,
                format!("self-loop on user {from}"),
            ));
        }
        edges.push((users.intern(from), users.intern(to)));
    }
    SocialGraph::from_edges(users.len(), edges)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

pub fn parse_ratings(path: &Path, users: &mut Labels, items: &mut Labels) -> Result<RatingsTable> {
    read_ratings(open(path)?, path, users, items)
}

pub fn parse_edges(path: &Path, users: &mut Labels) -> Result<SocialGraph> {
    read_edges(open(path)?, path, users)
}

/// Parses a ratings stream and an optional ties stream into one network.
/// With `symmetrize`, every tie is also added in the reverse direction.
pub fn read_srn<R: BufRead, S: BufRead>(
    ratings: R,
    edges: Option<S>,
    symmetrize: bool,
) -> Result<SocialRatingNetwork> {
    let mut users = Labels::new();
    let mut items = Labels::new();
    let table = read_ratings(ratings, Path::new("<ratings>"), &mut users, &mut items)?;
    let mut graph = match edges {
        Some(e) => read_edges(e, Path::new("<edges>"), &mut users)?,
        None => SocialGraph::new(users.len()),
    };
    if symmetrize {
        graph.symmetrize();
    }
    SocialRatingNetwork::assemble(table, graph, users, items)
}

pub fn load_srn(
    ratings: &Path,
    edges: Option<&Path>,
    symmetrize: bool,
) -> Result<SocialRatingNetwork> {
    let mut users = Labels::new();
    let mut items = Labels::new();
    let table = parse_ratings(ratings, &mut users, &mut items)?;
    let mut graph = match edges {
        Some(path) => parse_edges(path, &mut users)?,
        None => SocialGraph::new(users.len()),
    };
    if symmetrize {
        graph.symmetrize();
    }
    SocialRatingNetwork::assemble(table, graph, users, items)
}

fn user_label(srn: &SocialRatingNetwork, u: UserId) -> &str {
    srn.user_labels()
        .name(u.0)
        .expect("labels cover every user")
}

fn item_label(srn: &SocialRatingNetwork, i: ItemId) -> &str {
    srn.item_labels()
        .name(i.0)
        .expect("labels cover every item")
}

/// Writes ratings in stored order, values at full precision.
pub fn write_ratings<W: Write>(srn: &SocialRatingNetwork, mut out: W) -> Result<()> {
    for r in srn.ratings().entries() {
        writeln!(
            out,
            "{}\t{}\t{:?}",
            user_label(srn, r.user),
            item_label(srn, r.item),
            r.value
        )?;
    }
    Ok(())
}

pub fn write_edges<W: Write>(srn: &SocialRatingNetwork, mut out: W) -> Result<()> {
    for &(from, to) in srn.social().edges() {
        writeln!(out, "{}\t{}", user_label(srn, from), user_label(srn, to))?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn save_srn(srn: &SocialRatingNetwork, ratings: &Path, edges: &Path) -> Result<()> {
    let mut w = create(ratings)?;
    write_ratings(srn, &mut w)?;
    w.flush()?;
    let mut w = create(edges)?;
    write_edges(srn, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn save_model(model: &FactorModel, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    model.write_to(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<FactorModel> {
    FactorModel::read_from(open(path)?).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            path: PathBuf::from(path),
            line,
            message,
        },
        other => other,
    })
}

pub fn save_reports(reports: &[EvalReport], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{}", reports_to_json(reports)?)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(ratings: &str, edges: Option<&str>, symmetrize: bool) -> Result<SocialRatingNetwork> {
        read_srn(ratings.as_bytes(), edges.map(str::as_bytes), symmetrize)
    }

    #[test]
    fn three_lines_three_entries() {
        let srn = parse(
            "# header\nalice\tm1\t4\nbob\tm1\t2.5\n\nalice\tm2\t1\n",
            None,
            false,
        )
        .unwrap();
        assert_eq!(srn.ratings().len(), 3);
        assert_eq!(srn.n_users(), 2);
        assert_eq!(srn.n_items(), 2);
        assert_eq!(srn.user_labels().name(0), Some("alice"));
        assert_eq!(srn.ratings().get(UserId(1), ItemId(0)), Some(2.5));
    }

    #[test]
    fn self_loop_names_line() {
        let err = parse("u1\ti\t3\n", Some("u1\tu2\nu1\tu1\n"), false).unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("self-loop"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_rating_names_line() {
        let err = parse("a\tx\t3\nb\tx\t1\na\tx\t5\n", None, false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn malformed_lines_rejected() {
        for bad in [
            "a\tx\n",
            "a\tx\t3\t4\n",
            "a\tx\tfive\n",
            "a\tx\t-1\n",
            "\tx\t3\n",
        ] {
            assert!(
                matches!(parse(bad, None, false), Err(Error::Parse { line: 1, .. })),
                "{bad:?}"
            );
        }
        assert!(matches!(
            parse("a\tx\t3\n", Some("a\tb\tc\n"), false),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn edge_only_users_extend_index_space() {
        let srn = parse("a\tx\t3\n", Some("a\tz\n"), false).unwrap();
        assert_eq!(srn.n_users(), 2);
        assert_eq!(srn.ratings().n_users(), 2);
        assert_eq!(srn.user_labels().name(1), Some("z"));
        assert_eq!(srn.neighborhood(UserId(0)).unwrap(), &[UserId(1)]);
        assert!(srn.neighborhood(UserId(1)).unwrap().is_empty());
    }

    #[test]
    fn symmetrize_flag() {
        let srn = parse("a\tx\t3\nb\tx\t2\n", Some("a\tb\n"), true).unwrap();
        assert!(srn.social().is_symmetric());
        assert_eq!(srn.social().edge_count(), 2);
    }

    #[test]
    fn crlf_tolerated() {
        let srn = parse("a\tx\t3\r\nb\tx\t2\r\n", None, false).unwrap();
        assert_eq!(srn.ratings().len(), 2);
    }

    #[test]
    fn written_files_parse_back_identically() {
        let src = "b\tx\t3.0\na\ty\t0.1\nb\ty\t4.25\n";
        let srn = parse(src, Some("a\tb\nc\ta\n"), false).unwrap();
        let mut r = Vec::new();
        let mut e = Vec::new();
        write_ratings(&srn, &mut r).unwrap();
        write_edges(&srn, &mut e).unwrap();
        assert_eq!(String::from_utf8(r.clone()).unwrap(), src);
        let back = read_srn(&r[..], Some(&e[..]), false).unwrap();
        assert_eq!(back, srn);
    }
}
