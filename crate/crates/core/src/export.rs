//! GEXF 1.2 and Graphviz DOT writers.

use std::fmt::Write as _;

use crate::community::Partition;
use crate::graph::DomainGraph;
use crate::sharing::CoShareGraph;

/// Escape text for use inside an XML attribute value.
pub fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

const GEXF_OPEN: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
<gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n";

fn node_attributes(out: &mut String, with_community: bool) {
    out.push_str("    <attributes class=\"node\">\n");
    out.push_str("      <attribute id=\"0\" title=\"label\" type=\"string\"/>\n");
    out.push_str("      <attribute id=\"1\" title=\"category\" type=\"string\"/>\n");
    if with_community {
        out.push_str("      <attribute id=\"2\" title=\"community\" type=\"integer\"/>\n");
    }
    out.push_str("    </attributes>\n");
}

fn node(
    out: &mut String,
    id: usize,
    domain: &str,
    label: &str,
    category: &str,
    community: Option<usize>,
) {
    let _ = writeln!(
        out,
        "      <node id=\"{id}\" label=\"{}\">",
        xml_escape(domain)
    );
    out.push_str("        <attvalues>\n");
    let _ = writeln!(out, "          <attvalue for=\"0\" value=\"{label}\"/>");
    let _ = writeln!(out, "          <attvalue for=\"1\" value=\"{category}\"/>");
    if let Some(c) = community {
        let _ = writeln!(out, "          <attvalue for=\"2\" value=\"{c}\"/>");
    }
    out.push_str("        </attvalues>\n      </node>\n");
}

/// Directed hyperlink graph with `label` and `category` node attributes, plus
/// `community` when a partition is given.
pub fn domain_graph_gexf(graph: &DomainGraph, partition: Option<&Partition>) -> String {
    let mut out = String::from(GEXF_OPEN);
    out.push_str("  <graph mode=\"static\" defaultedgetype=\"directed\">\n");
    node_attributes(&mut out, partition.is_some());
    out.push_str("    <nodes>\n");
    for (i, n) in graph.nodes().iter().enumerate() {
        let community = partition.map(|p| p.assignment[i]);
        node(
            &mut out,
            i,
            &n.domain,
            n.label.as_str(),
            n.category.as_str(),
            community,
        );
    }
    out.push_str("    </nodes>\n    <edges>\n");
    for (k, (s, t)) in graph.edges().enumerate() {
        let _ = writeln!(
            out,
            "      <edge id=\"{k}\" source=\"{s}\" target=\"{t}\"/>"
        );
    }
    out.push_str("    </edges>\n  </graph>\n</gexf>\n");
    out
}

/// Undirected co-sharing graph; each edge carries its `jaccard` value and
/// the same number as its weight.
pub fn coshare_gexf(graph: &CoShareGraph) -> String {
    let mut out = String::from(GEXF_OPEN);
    out.push_str("  <graph mode=\"static\" defaultedgetype=\"undirected\">\n");
    node_attributes(&mut out, false);
    out.push_str("    <attributes class=\"edge\">\n");
    out.push_str("      <attribute id=\"0\" title=\"jaccard\" type=\"double\"/>\n");
    out.push_str("    </attributes>\n    <nodes>\n");
    for (i, n) in graph.nodes.iter().enumerate() {
        node(
            &mut out,
            i,
            &n.domain,
            n.label.as_str(),
            n.category.as_str(),
            None,
        );
    }
    out.push_str("    </nodes>\n    <edges>\n");
    for (k, e) in graph.edges.iter().enumerate() {
        let _ = writeln!(
            out,
            "      <edge id=\"{k}\" source=\"{}\" target=\"{}\" weight=\"{}\">\n        <attvalues>\n          <attvalue for=\"0\" value=\"{}\"/>\n        </attvalues>\n      </edge>",
            e.a, e.b, e.jaccard, e.jaccard
        );
    }
    out.push_str("    </edges>\n  </graph>\n</gexf>\n");
    out
}

/// Directed DOT with nodes named by domain.
pub fn domain_graph_dot(graph: &DomainGraph) -> String {
    let mut out = String::from("digraph domains {\n");
    for n in graph.nodes() {
        let _ = writeln!(
            out,
            "  {} [label={}, category={}];",
            dot_quote(&n.domain),
            dot_quote(n.label.as_str()),
            dot_quote(n.category.as_str())
        );
    }
    for (s, t) in graph.edges() {
        let _ = writeln!(
            out,
            "  {} -> {};",
            dot_quote(&graph.node(s).domain),
            dot_quote(&graph.node(t).domain)
        );
    }
    out.push_str("}\n");
    out
}

/// Undirected DOT with `jaccard` edge attributes.
pub fn coshare_dot(graph: &CoShareGraph) -> String {
    let mut out = String::from("graph coshare {\n");
    for n in &graph.nodes {
        let _ = writeln!(
            out,
            "  {} [label={}];",
            dot_quote(&n.domain),
            dot_quote(n.label.as_str())
        );
    }
    for e in &graph.edges {
        let _ = writeln!(
            out,
            "  {} -- {} [jaccard={}];",
            dot_quote(&graph.nodes[e.a].domain),
            dot_quote(&graph.nodes[e.b].domain),
            e.jaccard
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LabelIndex;
    use crate::label::{Category, Label};
    use crate::sharing::{CoShareEdge, CoShareNode};

    fn small() -> DomainGraph {
        let labels: LabelIndex = [
            ("a.com".to_string(), Label::Misinfo, Category::Uncategorized),
            ("b&c.com".to_string(), Label::Info, Category::NewsAndMedia),
        ]
        .into_iter()
        .collect();
        DomainGraph::from_edges(["a.com", "b&c.com"], [("a.com", "b&c.com")], &labels)
    }

    #[test]
    fn escaping() {
        assert_eq!(xml_escape("a<b>&\"'"), "a&lt;b&gt;&amp;&quot;&apos;");
        assert_eq!(dot_quote("x\"y"), "\"x\\\"y\"");
    }

    #[test]
    fn gexf_shape() {
        let g = small();
        let xml = domain_graph_gexf(&g, None);
        assert!(xml.contains("version=\"1.2\""));
        assert!(xml.contains("defaultedgetype=\"directed\""));
        assert!(xml.contains("<node id=\"1\" label=\"b&amp;c.com\">"));
        assert!(xml.contains("<attvalue for=\"1\" value=\"newsandmedia\"/>"));
        assert!(xml.contains("<edge id=\"0\" source=\"0\" target=\"1\"/>"));
        assert!(!xml.contains("community"));
        assert_eq!(xml.matches("<node ").count(), 2);
    }

    #[test]
    fn coshare_outputs() {
        let g = CoShareGraph {
            nodes: vec![
                CoShareNode {
                    domain: "a.com".into(),
                    label: Label::Misinfo,
                    category: Category::Uncategorized,
                },
                CoShareNode {
                    domain: "b.com".into(),
                    label: Label::Info,
                    category: Category::Health,
                },
            ],
            edges: vec![CoShareEdge {
                a: 0,
                b: 1,
                jaccard: 0.25,
            }],
            threshold: 0.01,
        };
        let xml = coshare_gexf(&g);
        assert!(xml.contains("title=\"jaccard\""));
        assert!(xml.contains("<attvalue for=\"0\" value=\"0.25\"/>"));
        assert!(coshare_dot(&g).contains("\"a.com\" -- \"b.com\" [jaccard=0.25];"));
    }

    #[test]
    fn dot_shape() {
        let dot = domain_graph_dot(&small());
        assert!(dot.starts_with("digraph domains {\n"));
        assert!(dot.contains("\"a.com\" -> \"b&c.com\";"));
        assert!(dot.ends_with("}\n"));
    }
}
