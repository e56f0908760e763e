"""The three-class token labeling scheme for keyphrase spans.

Label order is fixed because emission/transition matrices index by it.
"""

O = 0        # outside any keyphrase
B_CON = 1    # begins a keyphrase
I_CON = 2    # continues a keyphrase

LABELS = ("O", "B-CON", "I-CON")
N_LABELS = 3

# Hard constraint: an I-CON can never directly follow an O. Implemented as a
# large negative sentinel instead of -inf so all arithmetic stays finite; at
# desk-scale magnitudes it can never win a decode.
FORBIDDEN_SCORE = -1e4
