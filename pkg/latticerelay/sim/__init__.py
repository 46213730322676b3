"""Monte-Carlo realization of the MAC and broadcast phases."""
