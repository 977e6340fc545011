use crate::complex::{Complex3, Facet, FacetDocument, Vertex};
use crate::error::{Error, Result};

/// Parses a facet list in either the text or the JSON form.
///
/// Text: one facet per line, four whitespace-separated positive integers.
/// Blank lines and lines starting with `#` are skipped. JSON:
/// `{"facets": [[a,b,c,d], ...]}`.
pub fn parse_facets(text: &str) -> Result<Complex3> {
    let lists = parse_facet_lists(text)?;
    let mut facets: Vec<Facet> = Vec::with_capacity(lists.len());
    for (line, list) in lists {
        if list.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("expected 4 vertices, found {}", list.len()),
            });
        }
        facets.push([list[0], list[1], list[2], list[3]]);
    }
    if facets.is_empty() {
        return Err(Error::Empty);
    }
    Complex3::new(facets)
}

/// Parses a generic list of simplices (any arity) with line numbers.
///
/// Used for both tetrahedra and the triangle lists of 2-complexes; arity is
/// checked by the caller.
pub fn parse_facet_lists(text: &str) -> Result<Vec<(usize, Vec<Vertex>)>> {
    if text.trim_start().starts_with('{') {
        let doc: FacetDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        return doc
            .facets
            .into_iter()
            .enumerate()
            .map(|(i, f)| check_simplex(i + 1, f).map(|f| (i + 1, f)))
            .collect();
    }

    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let vertices = trimmed
            .split_whitespace()
            .map(|tok| {
                tok.parse::<Vertex>().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{tok}` is not a positive integer"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((line, check_simplex(line, vertices)?));
    }
    Ok(out)
}

fn check_simplex(line: usize, vertices: Vec<Vertex>) -> Result<Vec<Vertex>> {
    if vertices.contains(&0) {
        return Err(Error::Parse { line, message: "vertex labels must be positive".into() });
    }
    let mut sorted = vertices.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Parse { line, message: "repeated vertex in facet".into() });
    }
    Ok(vertices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_of_4_simplex() {
        let c = parse_facets("1 2 3 4\n1 2 3 5\n1 2 4 5\n1 3 4 5\n2 3 4 5\n").unwrap();
        assert_eq!(c.f_vector().as_array(), [5, 10, 10, 5]);
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = parse_facets("# header\n\n1 2 3 4\n  # indented comment\n1 2 3 5\n").unwrap();
        assert_eq!(c.facet_count(), 2);
    }

    #[test]
    fn arity_error_reports_line() {
        match parse_facets("1 2 3") {
            Err(Error::Parse { line: 1, message }) => assert!(message.contains("expected 4")),
            other => panic!("{other:?}"),
        }
        match parse_facets("1 2 3 4\n\n1 2 3 4 5\n") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_tokens() {
        assert!(matches!(parse_facets("1 2 x 4"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_facets("1 2 -3 4"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_facets("0 1 2 3"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_facets("1 2 2 3"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn duplicates_and_empty() {
        assert!(matches!(parse_facets("1 2 3 4\n2 1 4 3\n"), Err(Error::DuplicateFacet(_))));
        assert!(matches!(parse_facets("# nothing\n"), Err(Error::Empty)));
    }

    #[test]
    fn json_form() {
        let c = parse_facets(r#"{"facets": [[1,2,3,4],[1,2,3,5],[1,2,4,5],[1,3,4,5],[2,3,4,5]]}"#)
            .unwrap();
        assert_eq!(c.f_vector().as_array(), [5, 10, 10, 5]);
        assert!(matches!(parse_facets(r#"{"facets": [[1,2,3]]}"#), Err(Error::Parse { .. })));
        assert!(matches!(parse_facets(r#"{"facets": [[1,2,3,"#), Err(Error::Parse { .. })));
    }

    #[test]
    fn text_json_round_trip() {
        let c = parse_facets("1 2 3 4\n1 2 3 5\n1 2 4 5\n1 3 4 5\n2 3 4 5\n").unwrap();
        assert_eq!(parse_facets(&c.to_json()).unwrap(), c);
        assert_eq!(parse_facets(&c.to_text()).unwrap(), c);
    }
}
