"""Toolkit for mining summarization datasets from digitized newspapers:
front-page teaser detection, teaser-to-article matching, dataset
assembly, quality metrics and annotation tooling."""

__version__ = "0.1.0"
