"""Everything related to processing of models, data and so forth."""
