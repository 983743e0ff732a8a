use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Ground-truth class of a domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Misinfo,
    Info,
    /// Not part of either curated list.
    None,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Misinfo => "misinfo",
            Label::Info => "info",
            Label::None => "none",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "misinfo" => Ok(Label::Misinfo),
            "info" => Ok(Label::Info),
            "none" | "" => Ok(Label::None),
            other => Err(Error::InvalidParameter(format!("unknown label {other:?}"))),
        }
    }
}

/// Topical category of an informational domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    NewsAndMedia,
    Business,
    Education,
    Entertainment,
    Sports,
    Health,
    Religion,
    Uncategorized,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::NewsAndMedia,
        Category::Business,
        Category::Education,
        Category::Entertainment,
        Category::Sports,
        Category::Health,
        Category::Religion,
        Category::Uncategorized,
    ];

    /// Row order used by link-statistics tables.
    pub const TABLE_ORDER: [Category; 7] = [
        Category::Entertainment,
        Category::Education,
        Category::NewsAndMedia,
        Category::Business,
        Category::Sports,
        Category::Religion,
        Category::Health,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::NewsAndMedia => "newsandmedia",
            Category::Business => "business",
            Category::Education => "education",
            Category::Entertainment => "entertainment",
            Category::Sports => "sports",
            Category::Health => "health",
            Category::Religion => "religion",
            Category::Uncategorized => "uncategorized",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match key.as_str() {
            "newsandmedia" | "newsmedia" | "news" => Category::NewsAndMedia,
            "business" => Category::Business,
            "education" => Category::Education,
            "entertainment" => Category::Entertainment,
            "sports" => Category::Sports,
            "health" => Category::Health,
            "religion" => Category::Religion,
            "uncategorized" | "" => Category::Uncategorized,
            _ => return Err(Error::InvalidParameter(format!("unknown category {s:?}"))),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn category_aliases() {
        for alias in [
            "news & media",
            "news&media",
            "NewsAndMedia",
            "news_and_media",
        ] {
            assert_eq!(alias.parse::<Category>().unwrap(), Category::NewsAndMedia);
        }
        assert!("politics".parse::<Category>().is_err());
        for c in Category::ALL {
            assert_eq!(c.as_str().parse::<Category>().unwrap(), c);
        }
    }

    #[test]
    fn label_round_trip() {
        for l in [Label::Misinfo, Label::Info, Label::None] {
            assert_eq!(l.as_str().parse::<Label>().unwrap(), l);
        }
    }
}
