"""Exception types raised across the engine."""


class FedSearchError(Exception):
    pass


class EmptyCorpus(FedSearchError):
    pass


class MixedVertical(FedSearchError):
    pass


class DuplicateDocId(FedSearchError):
    pass


class EmptyQuery(FedSearchError):
    pass


class EmptyBlock(FedSearchError):
    pass


class NoEligibleVertical(FedSearchError):
    pass


class EmptyPrimary(FedSearchError):
    pass


class DegenerateLabels(FedSearchError):
    def __init__(self, label_name: str):
        super().__init__(f"only one class present for {label_name!r}")
        self.label_name = label_name


class NonFiniteLoss(FedSearchError):
    pass
