"""Label encoding and the tie-breaking rule shared by every classifier."""
import numpy as np

PREFERRED = "yes"


def encode_labels(y):
    """``(classes_, codes)`` with classes sorted as sklearn does."""
    classes, codes = np.unique(np.asarray(y, dtype=object).astype(str), return_inverse=True)
    if classes.size < 1:
        raise ValueError("no labels")
    return classes.astype(object), codes.astype(np.intp)


def tie_order(classes):
    """Column indices in tie-break priority: "yes" first, then ``classes`` order."""
    classes = list(classes)
    first = [classes.index(PREFERRED)] if PREFERRED in classes else []
    return np.array(first + [i for i in range(len(classes)) if i not in first], dtype=np.intp)


def prefer_yes_argmax(scores, classes):
    """Row-wise argmax where exact ties resolve by :func:`tie_order`."""
    scores = np.atleast_2d(scores)
    order = tie_order(classes)
    return order[np.argmax(scores[:, order], axis=1)]
