"""Short-answer grading pipeline: preprocessing, clustering, similarity
scoring, mark-model fitting, and a teacher review service."""

__version__ = "0.1.0"
