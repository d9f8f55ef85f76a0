from .base import GeoDistribution, SearchResult, parse_date_guess
from .policy import DomainPolicy, default_policy, filter_urls, load_policy_file
from .search import SearchClient
from .vision import GeoClient, VisionClient
from .scrape import ScrapeClient
from .kb import EmbedClient, KbDocument, KnowledgeBase, build_index, kb_search
from .toolset import ToolOutput, ToolSet

__all__ = [
    "DomainPolicy",
    "EmbedClient",
    "GeoClient",
    "GeoDistribution",
    "KbDocument",
    "KnowledgeBase",
    "ScrapeClient",
    "SearchClient",
    "SearchResult",
    "ToolOutput",
    "ToolSet",
    "VisionClient",
    "build_index",
    "default_policy",
    "filter_urls",
    "kb_search",
    "load_policy_file",
    "parse_date_guess",
]
