# Tests package





