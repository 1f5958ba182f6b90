"""Exception hierarchy for the whole engine.

Every error carries a stable ``code`` (its class name) so the HTTP layer can
map failures to structured ``{error_code, message}`` bodies without string
matching.
"""


class PlanForgeError(Exception):
    """Base class for all engine errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class InvalidRequest(PlanForgeError):
    """Caller fault that has no more specific error class."""


# --- template engine ---------------------------------------------------------

class TemplateError(PlanForgeError):
    pass


class TemplateDocumentError(TemplateError):
    """Template document is structurally malformed (bad JSON, bad ids, bad slots)."""


class MissingTemplate(TemplateError):
    def __init__(self, template_id: str):
        super().__init__(f"template library is missing {template_id}")
        self.template_id = template_id


class DuplicateTemplate(TemplateError):
    def __init__(self, template_id: str):
        super().__init__(f"template {template_id} appears more than once")
        self.template_id = template_id


class UnknownPlaceholder(TemplateError):
    def __init__(self, name: str, template_id: str):
        super().__init__(f"template {template_id} references unknown placeholder {{{{{name}}}}}")
        self.name = name
        self.template_id = template_id


class MissingUpstream(TemplateError):
    def __init__(self, template_id: str):
        super().__init__(f"template {template_id} requires an upstream prompt")
        self.template_id = template_id


class WrongUpstream(TemplateError):
    def __init__(self, template_id: str, got: str | None, want: str | None):
        super().__init__(
            f"template {template_id} expects upstream {want or 'none'}, got {got or 'none'}"
        )
        self.template_id = template_id
        self.got = got
        self.want = want


class EmptyRequiredField(TemplateError):
    def __init__(self, field: str):
        super().__init__(f"curriculum input field '{field}' is empty but required")
        self.field = field


# --- llm gateway -------------------------------------------------------------

class GatewayError(PlanForgeError):
    pass


class UnknownModel(GatewayError):
    def __init__(self, model_id: str):
        super().__init__(f"no provider registered for model '{model_id}'")
        self.model_id = model_id


class ProviderUnavailable(GatewayError):
    pass


# --- plan pipeline -----------------------------------------------------------

class PipelineError(PlanForgeError):
    pass


class OptimizationFailed(PipelineError):
    pass


class GenerationFailed(PipelineError):
    pass


class MalformedScore(PipelineError):
    def __init__(self, dimension_key: str, detail: str):
        super().__init__(f"unparseable score for '{dimension_key}': {detail}")
        self.dimension_key = dimension_key


# --- case library ------------------------------------------------------------

class LibraryError(PlanForgeError):
    pass


class EmptyDocument(LibraryError):
    pass


class NoTokens(LibraryError):
    def __init__(self, text: str):
        super().__init__("text yields no tokens to embed")
        self.text = text


class UnknownFile(LibraryError):
    def __init__(self, file_id: str):
        super().__init__(f"no document with file id '{file_id}'")
        self.file_id = file_id


# --- plan structurer ---------------------------------------------------------

class StructurerError(PlanForgeError):
    pass


class IndexOutOfRange(StructurerError):
    def __init__(self, index: int, size: int):
        super().__init__(f"row index {index} out of range for {size} rows")
        self.index = index
        self.size = size


class UnknownSection(StructurerError):
    def __init__(self, name: str):
        super().__init__(f"row references unknown section '{name}'")
        self.name = name


# --- knowledge graph ---------------------------------------------------------

class GraphError(PlanForgeError):
    pass


class EmptyText(GraphError):
    pass


class ExtractionFailed(GraphError):
    pass


class UnknownNode(GraphError):
    def __init__(self, key: str):
        super().__init__(f"no node with key '{key}'")
        self.key = key


class UnknownEdge(GraphError):
    def __init__(self, key: tuple[str, str, str]):
        super().__init__(f"no edge {key}")
        self.key = key


class DuplicateNode(GraphError):
    def __init__(self, key: str):
        super().__init__(f"node '{key}' already exists")
        self.key = key


class MalformedGraphFile(GraphError):
    pass


class VersionConflict(GraphError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"graph version is {actual}, caller expected {expected}")
        self.expected = expected
        self.actual = actual


# --- service / storage -------------------------------------------------------

class StorageError(PlanForgeError):
    pass


class CorruptRecord(StorageError):
    def __init__(self, path: str, detail: str):
        super().__init__(f"cannot load {path}: {detail}")
        self.path = path


class ConfigError(PlanForgeError):
    pass


class UnknownSessionError(PlanForgeError):
    def __init__(self, session_id: str):
        super().__init__(f"no session '{session_id}'")
        self.session_id = session_id

    @property
    def code(self) -> str:
        return "UnknownSession"


class UnknownPlanError(PlanForgeError):
    def __init__(self, plan_id: str):
        super().__init__(f"no plan '{plan_id}'")
        self.plan_id = plan_id

    @property
    def code(self) -> str:
        return "UnknownPlan"


class UnknownGraphError(PlanForgeError):
    def __init__(self, graph_id: str):
        super().__init__(f"no graph '{graph_id}'")
        self.graph_id = graph_id

    @property
    def code(self) -> str:
        return "UnknownGraph"
