//! Book chapters as doc-tests, so every snippet in `book/src` is compiled and run.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/kernels.md")]
pub mod kernels {}
#[doc = include_str!("../../../book/src/kaf.md")]
pub mod kaf {}
#[doc = include_str!("../../../book/src/networks.md")]
pub mod networks {}
#[doc = include_str!("../../../book/src/data.md")]
pub mod data {}
#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}
#[doc = include_str!("../../../book/src/gradcheck.md")]
pub mod gradcheck {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[cfg(test)]
mod tests {
    use std::path::Path;

    #[test]
    fn config_sample_in_the_book_parses() {
        let text = include_str!("../../../book/src/cli.md");
        let start = text.find("```text\n# relu").unwrap() + "```text\n".len();
        let body = &text[start..start + text[start..].find("```").unwrap()];
        kafforge::cli::RunConfig::parse(body, Path::new("/tmp")).unwrap();
    }

    #[test]
    fn summary_lists_every_chapter() {
        let summary = include_str!("../../../book/src/SUMMARY.md");
        for ch in ["introduction", "kernels", "kaf", "networks", "data", "training", "gradcheck", "cli"] {
            assert!(summary.contains(&format!("({ch}.md)")), "{ch}");
        }
    }
}
