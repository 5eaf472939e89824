//! Newick serialization.
//!
//! Accepts a single statement terminated by `;`. Branch lengths are
//! required on all non-root edges unless a default length is supplied via
//! [`NewickOptions`]. Internal node labels and `[...]` comments are parsed
//! and discarded. Quoted labels (`'so is this'`, with `''` escaping an
//! embedded quote) are supported on tips.

use thiserror::Error;

use super::{Node, NodeId, PhyloTree, TreeError};

#[derive(Debug, Error)]
pub enum NewickError {
    #[error("empty input: expected a Newick statement")]
    EmptyInput,
    #[error("unexpected end of input (unterminated statement)")]
    UnexpectedEnd,
    #[error("unexpected character {found:?} at offset {offset}")]
    UnexpectedChar { found: char, offset: usize },
    #[error("trailing content after ';' at offset {offset}")]
    TrailingContent { offset: usize },
    #[error("unterminated quoted label starting at offset {offset}")]
    UnterminatedQuote { offset: usize },
    #[error("unterminated comment starting at offset {offset}")]
    UnterminatedComment { offset: usize },
    #[error("missing branch length at offset {offset} (no default length configured)")]
    MissingBranchLength { offset: usize },
    #[error("invalid branch length {text:?} at offset {offset}")]
    BadBranchLength { text: String, offset: usize },
    #[error("negative branch length {length} at offset {offset}")]
    NegativeBranchLength { length: f64, offset: usize },
    #[error("tip without a label at offset {offset}")]
    MissingTipLabel { offset: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Parser knobs. The default requires explicit branch lengths everywhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct NewickOptions {
    /// Used for edges that carry no `:length`; `None` makes them an error.
    pub default_branch_length: Option<f64>,
}

/// Parse a single Newick statement into a tree.
pub fn parse_newick(text: &str) -> Result<PhyloTree, NewickError> {
    parse_newick_opts(text, NewickOptions::default())
}

pub fn parse_newick_opts(text: &str, opts: NewickOptions) -> Result<PhyloTree, NewickError> {
    let mut parser = Parser {
        chars: text.chars().collect(),
        pos: 0,
        opts,
        nodes: Vec::new(),
    };
    parser.skip_space()?;
    if parser.peek().is_none() {
        return Err(NewickError::EmptyInput);
    }
    let root = parser.parse_subtree(true)?;
    parser.skip_space()?;
    match parser.next() {
        Some(';') => {}
        Some(c) => {
            return Err(NewickError::UnexpectedChar {
                found: c,
                offset: parser.pos - 1,
            })
        }
        None => return Err(NewickError::UnexpectedEnd),
    }
    parser.skip_space()?;
    if parser.peek().is_some() {
        return Err(NewickError::TrailingContent { offset: parser.pos });
    }
    // The root's incoming length is always treated as zero.
    parser.nodes[root].branch_length = 0.0;
    Ok(PhyloTree::from_nodes(parser.nodes, root)?)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    opts: NewickOptions,
    nodes: Vec<Node>,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    /// Skip whitespace and `[...]` comments.
    fn skip_space(&mut self) -> Result<(), NewickError> {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.pos += 1;
                }
                Some('[') => {
                    let start = self.pos;
                    while let Some(c) = self.next() {
                        if c == ']' {
                            break;
                        }
                    }
                    if self.pos > self.chars.len()
                        || self.chars.get(self.pos - 1).copied() != Some(']')
                    {
                        return Err(NewickError::UnterminatedComment { offset: start });
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn push_node(&mut self, label: Option<String>, branch_length: f64) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node {
            parent: None,
            children: Vec::new(),
            branch_length,
            label,
        });
        id
    }

    fn parse_subtree(&mut self, is_root: bool) -> Result<NodeId, NewickError> {
        self.skip_space()?;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let mut children = Vec::new();
                loop {
                    let child = self.parse_subtree(false)?;
                    children.push(child);
                    self.skip_space()?;
                    match self.next() {
                        Some(',') => continue,
                        Some(')') => break,
                        Some(c) => {
                            return Err(NewickError::UnexpectedChar {
                                found: c,
                                offset: self.pos - 1,
                            })
                        }
                        None => return Err(NewickError::UnexpectedEnd),
                    }
                }
                // Internal labels are legal Newick but carry no meaning here.
                let _ = self.parse_label()?;
                let bl = self.parse_branch_length(is_root)?;
                let id = self.push_node(None, bl);
                for &c in &children {
                    self.nodes[c].parent = Some(id);
                }
                self.nodes[id].children = children;
                Ok(id)
            }
            Some(_) => {
                let start = self.pos;
                let label = self.parse_label()?;
                let label = match label {
                    Some(l) if !l.is_empty() => l,
                    _ => return Err(NewickError::MissingTipLabel { offset: start }),
                };
                let bl = self.parse_branch_length(is_root)?;
                Ok(self.push_node(Some(label), bl))
            }
            None => Err(NewickError::UnexpectedEnd),
        }
    }

    fn parse_label(&mut self) -> Result<Option<String>, NewickError> {
        self.skip_space()?;
        match self.peek() {
            Some('\'') => {
                let start = self.pos;
                self.pos += 1;
                let mut label = String::new();
                loop {
                    match self.next() {
                        Some('\'') => {
                            if self.peek() == Some('\'') {
                                label.push('\'');
                                self.pos += 1;
                            } else {
                                break;
                            }
                        }
                        Some(c) => label.push(c),
                        None => return Err(NewickError::UnterminatedQuote { offset: start }),
                    }
                }
                Ok(Some(label))
            }
            Some(c) if !is_structural(c) && !c.is_whitespace() => {
                let mut label = String::new();
                while let Some(c) = self.peek() {
                    if is_structural(c) || c.is_whitespace() {
                        break;
                    }
                    label.push(c);
                    self.pos += 1;
                }
                Ok(Some(label))
            }
            _ => Ok(None),
        }
    }

    fn parse_branch_length(&mut self, is_root: bool) -> Result<f64, NewickError> {
        self.skip_space()?;
        if self.peek() != Some(':') {
            if is_root {
                return Ok(0.0);
            }
            return match self.opts.default_branch_length {
                Some(d) => Ok(d),
                None => Err(NewickError::MissingBranchLength { offset: self.pos }),
            };
        }
        self.pos += 1;
        self.skip_space()?;
        let start = self.pos;
        let mut text = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E') {
                text.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        let length: f64 = text.parse().map_err(|_| NewickError::BadBranchLength {
            text: text.clone(),
            offset: start,
        })?;
        if !length.is_finite() {
            return Err(NewickError::BadBranchLength {
                text,
                offset: start,
            });
        }
        if length < 0.0 {
            return Err(NewickError::NegativeBranchLength {
                length,
                offset: start,
            });
        }
        Ok(length)
    }
}

fn is_structural(c: char) -> bool {
    matches!(c, '(' | ')' | ',' | ':' | ';' | '[' | ']' | '\'')
}

/// Render a tree as a Newick statement. Branch lengths use the shortest
/// decimal that round-trips, so `parse_newick(write_newick(t))` reproduces
/// topology and lengths exactly. Labels containing structural characters or
/// whitespace are single-quoted.
pub fn write_newick(tree: &PhyloTree) -> String {
    let mut out = String::new();
    write_subtree(tree, tree.root(), true, &mut out);
    out.push(';');
    out
}

fn write_subtree(tree: &PhyloTree, id: NodeId, is_root: bool, out: &mut String) {
    let node = tree.node(id);
    if node.children.is_empty() {
        out.push_str(&quote_label(node.label.as_deref().unwrap_or("")));
    } else {
        out.push('(');
        for (i, &c) in node.children.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write_subtree(tree, c, false, out);
        }
        out.push(')');
    }
    if !is_root {
        out.push(':');
        out.push_str(&format!("{}", node.branch_length));
    }
}

fn quote_label(label: &str) -> String {
    let needs_quoting = label
        .chars()
        .any(|c| is_structural(c) || c.is_whitespace());
    if needs_quoting {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_two_tip() {
        let t = parse_newick("(A:1,B:1);").unwrap();
        assert_eq!(t.n_tips(), 2);
        assert_eq!(t.tip_labels(), vec!["A", "B"]);
        assert_eq!(t.root_to_tip_distance("A").unwrap(), 1.0);
        assert_eq!(t.root_to_tip_distance("B").unwrap(), 1.0);
    }

    #[test]
    fn nested_three_tip() {
        let t = parse_newick("((A:1,B:1):1,C:2);").unwrap();
        assert_eq!(t.n_tips(), 3);
        assert_eq!(t.tip_labels(), vec!["A", "B", "C"]);
        // A and B share a depth-1 ancestor.
        let a = t.tip_id("A").unwrap();
        let b = t.tip_id("B").unwrap();
        assert_eq!(t.node(a).parent, t.node(b).parent);
        let anc = t.node(a).parent.unwrap();
        assert_eq!(t.node(anc).branch_length, 1.0);
    }

    #[test]
    fn unterminated_errors() {
        assert!(matches!(
            parse_newick("((A:1,B:1):1,C:2"),
            Err(NewickError::UnexpectedEnd)
        ));
    }

    #[test]
    fn unbalanced_errors() {
        assert!(parse_newick("((A:1,B:1):1;").is_err());
        assert!(parse_newick("(A:1,B:1)):1;").is_err());
    }

    #[test]
    fn duplicate_tip_errors() {
        assert!(matches!(
            parse_newick("(A:1,A:1);"),
            Err(NewickError::Tree(TreeError::DuplicateTipLabel(_)))
        ));
    }

    #[test]
    fn negative_branch_length_errors() {
        assert!(matches!(
            parse_newick("(A:1,B:-0.5);"),
            Err(NewickError::NegativeBranchLength { .. })
        ));
    }

    #[test]
    fn empty_input_errors() {
        assert!(matches!(parse_newick("   "), Err(NewickError::EmptyInput)));
        assert!(parse_newick(";").is_err());
    }

    #[test]
    fn missing_length_requires_default() {
        assert!(matches!(
            parse_newick("(A,B:1);"),
            Err(NewickError::MissingBranchLength { .. })
        ));
        let t = parse_newick_opts(
            "(A,B:1);",
            NewickOptions {
                default_branch_length: Some(1.0),
            },
        )
        .unwrap();
        assert_eq!(t.root_to_tip_distance("A").unwrap(), 1.0);
    }

    #[test]
    fn internal_labels_and_comments_discarded() {
        let t = parse_newick("((A:1,B:1)anc[a comment]:1,C:2);").unwrap();
        assert_eq!(t.n_tips(), 3);
        let a = t.tip_id("A").unwrap();
        let anc = t.node(a).parent.unwrap();
        assert_eq!(t.node(anc).label, None);
    }

    #[test]
    fn root_trailing_length_is_zero() {
        let t = parse_newick("(A:1,B:1):7;").unwrap();
        assert_eq!(t.node(t.root()).branch_length, 0.0);
    }

    #[test]
    fn polytomy_accepted() {
        let t = parse_newick("(A:1,B:1,C:1);").unwrap();
        assert_eq!(t.n_tips(), 3);
        assert!(!t.is_binary() || t.node(t.root()).children.len() == 3);
    }

    #[test]
    fn round_trip_minimal() {
        let text = "(A:1,B:1);";
        let t = parse_newick(text).unwrap();
        assert_eq!(write_newick(&t), text);
    }

    #[test]
    fn quoted_labels_round_trip() {
        let t = parse_newick("('we(ird',B:1);").unwrap_err();
        // missing length on the quoted tip; supply it
        let _ = t;
        let t = parse_newick("('we(ird':2,B:1);").unwrap();
        assert_eq!(t.tip_labels(), vec!["we(ird", "B"]);
        let rendered = write_newick(&t);
        let back = parse_newick(&rendered).unwrap();
        assert_eq!(back.tip_labels(), vec!["we(ird", "B"]);
    }

    #[test]
    fn embedded_quote_escapes() {
        let t = parse_newick("('it''s a tip':1,B:1);").unwrap();
        assert_eq!(t.tip_labels()[0], "it's a tip");
        let back = parse_newick(&write_newick(&t)).unwrap();
        assert_eq!(back.tip_labels()[0], "it's a tip");
    }

    #[test]
    fn whitespace_tolerated() {
        let t = parse_newick(" ( (A:1, B:1) : 1 , C:2 ) ;\n").unwrap();
        assert_eq!(t.n_tips(), 3);
    }
}
