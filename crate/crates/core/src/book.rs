#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}
#[doc = include_str!("../../../book/src/fields.md")]
mod fields {}
#[doc = include_str!("../../../book/src/dictionaries.md")]
mod dictionaries {}
#[doc = include_str!("../../../book/src/splitting.md")]
mod splitting {}
#[doc = include_str!("../../../book/src/search.md")]
mod search {}
#[doc = include_str!("../../../book/src/data.md")]
mod data {}
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
