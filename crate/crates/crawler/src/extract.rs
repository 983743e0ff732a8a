use scraper::{Html, Selector};
use url::Url;

/// Absolute http(s) targets of every `<a href>` in document order.
///
/// Relative references resolve against `<base href>` when the document has
/// one, otherwise against `base_url`. Fragment-only and empty hrefs, other
/// schemes, and unparsable references are dropped. Never fails: malformed
/// markup is parsed best-effort.
pub fn extract_hyperlinks(html: &[u8], base_url: &Url) -> Vec<String> {
    let text = String::from_utf8_lossy(html);
    let doc = Html::parse_document(&text);
    let anchors = Selector::parse("a[href]").expect("static selector");
    let base_tag = Selector::parse("base[href]").expect("static selector");

    let base = doc
        .select(&base_tag)
        .next()
        .and_then(|b| b.value().attr("href"))
        .and_then(|href| base_url.join(href.trim()).ok())
        .unwrap_or_else(|| base_url.clone());

    doc.select(&anchors)
        .filter_map(|a| a.value().attr("href"))
        .map(str::trim)
        .filter(|href| !href.is_empty() && !href.starts_with('#'))
        .filter_map(|href| base.join(href).ok())
        .filter(|u| matches!(u.scheme(), "http" | "https") && u.host().is_some())
        .map(String::from)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Url {
        Url::parse("https://hoggwatch.com/").unwrap()
    }

    #[test]
    fn relative_and_absolute() {
        let html = br#"<a href="/posts/x">x</a><a href="https://www.infowars.com/posts/abc">y</a>"#;
        assert_eq!(
            extract_hyperlinks(html, &base()),
            [
                "https://hoggwatch.com/posts/x",
                "https://www.infowars.com/posts/abc"
            ]
        );
    }

    #[test]
    fn ten_anchor_document() {
        let html = br##"<html><body>
            <a href="mailto:ed@hoggwatch.com">1</a>
            <a href="https://a.com/">2</a>
            <a href="#top">3</a>
            <a href="about">4</a>
            <a href="http://b.org/x?y=1">5</a>
            <a href="mailto:tips@hoggwatch.com">6</a>
            <a href="//cdn.c.net/lib">7</a>
            <a href="../up">8</a>
            <a href="https://d.news/#frag">9</a>
            <a href=" /spaced ">10</a>
        </body></html>"##;
        let base = Url::parse("https://hoggwatch.com/dir/page").unwrap();
        assert_eq!(
            extract_hyperlinks(html, &base),
            [
                "https://a.com/",
                "https://hoggwatch.com/dir/about",
                "http://b.org/x?y=1",
                "https://cdn.c.net/lib",
                "https://hoggwatch.com/up",
                "https://d.news/#frag",
                "https://hoggwatch.com/spaced",
            ]
        );
    }

    #[test]
    fn other_schemes_and_junk() {
        let html = br#"<a href="javascript:void(0)">a</a><a href="tel:+1">b</a><a href="ftp://x.com/">c</a>
            <a>no href</a><a href="">empty</a><a href="http://[bad">bad</a><div><a href="ok">unclosed"#;
        assert_eq!(
            extract_hyperlinks(html, &base()),
            ["https://hoggwatch.com/ok"]
        );
    }

    #[test]
    fn base_tag_and_binary_noise() {
        let html = b"<head><base href=\"https://other.org/sub/\"></head><a href=\"p\">\xff\xfe</a>";
        assert_eq!(
            extract_hyperlinks(html, &base()),
            ["https://other.org/sub/p"]
        );
        assert!(extract_hyperlinks(b"\x00\x01not html", &base()).is_empty());
    }
}
