"""Source package for the defsum project."""
