//! Doc-test bridge: every chapter of the repository book is compiled as a
//! doc-test here, so the code snippets in `book/` cannot drift out of sync
//! with the library.

// Chapters are added as they are written; see `book/src/SUMMARY.md`.
