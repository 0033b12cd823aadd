"""sklearn-style estimator around the convolutional classifier."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from ..scans import Augmentation, Verdict
from ..validation import as_image_array, as_label_array
from .model import ERRONEOUS_INDEX, Model
from .train import TrainConfig, fit_items


class CnnSeamClassifier(BaseEstimator, ClassifierMixin):
    """Binary seam classifier with a fit/predict surface.

    X is a uint8 array of shape (n, 299, 299) or a list of
    ProcessedImage; y holds Verdicts, their string spellings, or 0/1
    (1 = Erroneous). Optional validation data drives the retained
    best checkpoint, mirroring the pipeline training protocol.
    """

    def __init__(self, epochs: int = 30, learning_rate: float = 1e-2,
                 batch_size: int = 16, seed: int = 0, threshold: float = 0.5,
                 class_weight: str | None = None):
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.seed = seed
        self.threshold = threshold
        self.class_weight = class_weight

    def fit(self, X, y, X_val=None, y_val=None):
        images = as_image_array(X)
        labels = as_label_array(y, len(images))
        fetchable = {f"x{i}": img for i, img in enumerate(images)}
        train_items = [(f"x{i}", Augmentation.NONE, int(label)) for i, label in enumerate(labels)]
        val_items = []
        if X_val is not None:
            val_images = as_image_array(X_val)
            val_labels = as_label_array(y_val, len(val_images))
            for i, (img, label) in enumerate(zip(val_images, val_labels)):
                fetchable[f"v{i}"] = img
                val_items.append((f"v{i}", Augmentation.NONE, int(label)))

        cfg = TrainConfig(epochs=self.epochs, learning_rate=self.learning_rate,
                          batch_size=self.batch_size, seed=self.seed, runs=1,
                          class_weight=self.class_weight)
        result = fit_items(train_items, val_items, lambda sid, _v: fetchable[sid], cfg)
        self.model_: Model = result.best_model if val_items else result.final_model
        self.final_model_ = result.final_model
        self.trace_ = result.trace
        self.best_epoch_ = result.best_epoch
        self.classes_ = np.array([Verdict.FAULTLESS, Verdict.ERRONEOUS], dtype=object)
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise NotFittedError("this CnnSeamClassifier instance is not fitted yet")

    def predict_proba(self, X) -> np.ndarray:
        self._check_fitted()
        return self.model_.predict_proba(as_image_array(X))

    def predict(self, X) -> np.ndarray:
        probs = self.predict_proba(X)
        positive = probs[:, ERRONEOUS_INDEX] >= self.threshold
        return np.array([Verdict.ERRONEOUS if p else Verdict.FAULTLESS for p in positive],
                        dtype=object)
