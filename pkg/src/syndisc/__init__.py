"""Entity synonym discovery from an annotated corpus and a knowledge-base seed list.

The pipeline has two cooperating halves: a distributional module that learns
string embeddings plus a bilinear synonym scorer from a string co-occurrence
graph, and a pattern module that classifies dependency paths connecting
co-mentioned strings.  Both are trained jointly by alternating sampled
gradient steps, and candidate synonyms are ranked by a weighted sum of the
two scores.
"""

__version__ = "0.1.0"
