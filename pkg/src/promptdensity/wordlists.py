"""Closed-class word lists backing token classification and rewriting.

These are defaults; ScoreConfig lets callers extend or replace them.
"""
from __future__ import annotations

# Determiners, prepositions, conjunctions, auxiliaries, pronouns (plus the
# interrogative pro-forms and common contractions of pronoun + auxiliary).
FUNCTION_WORDS: frozenset[str] = frozenset("""
a an the this that these those each every either neither both all any some no
such same other another

of in on at by for with about against between into through during before after
above below to from up down under over across behind beyond near toward towards
upon within without along around among amongst via per versus vs off onto out

and or but nor so yet if because although though while whereas unless since
until when whenever where wherever whether than as

am is are was were be been being do does did done have has had having will
would shall should can could may might must ought need dare

i you he she it we they me him her us them my your his its our their mine
yours hers ours theirs myself yourself himself herself itself ourselves
yourselves themselves who whom whose which what one's there

how why here

i'm i'd i'll i've you're you'd you'll you've he's she's it's we're we'd we'll
we've they're they'd they'll they've that's there's here's what's who's let's
isn't aren't wasn't weren't don't doesn't didn't haven't hasn't hadn't won't
wouldn't shan't shouldn't can't couldn't mayn't mightn't mustn't needn't ain't
""".split())

# Generic abstract vocabulary; a semantic token from this list never counts
# as concrete. Includes vague manner/degree adverbs the rewrite rules target.
ABSTRACT_WORDS: frozenset[str] = frozenset("""
thing things something anything everything nothing stuff matter matters aspect
aspects concept concepts idea ideas notion notions way ways manner sense
general generally overall basically essentially relatively fairly roughly
approximately somewhat briefly quickly slowly soon various certain interesting
creative nice good great bad better best modern simple complex difficult easy
important relevant appropriate suitable proper meaningful useful helpful
know knows knew known understand understands understood think thinks thought
believe believes believed feel feels felt guess guesses wonder wonders suppose
supposes hope hopes hoped wish wishes want wants wanted like likes liked
intelligence knowledge wisdom awareness consciousness creativity complexity
possibility possibilities context background situation circumstance
circumstances issue issues topic topics subject subjects area areas field
fields type types thinking thoughts right okay vague basic curious sure long
""".split())

# Nominalization -> active verb. Keys are treated as abstract (non-concrete)
# semantic tokens; the rewrite rules use the values as replacements.
NOMINALIZATION_VERBS: dict[str, str] = {
    "derivation": "derive",
    "explanation": "explain",
    "description": "describe",
    "definition": "define",
    "calculation": "calculate",
    "computation": "compute",
    "implementation": "implement",
    "optimization": "optimize",
    "evaluation": "evaluate",
    "analysis": "analyze",
    "summary": "summarize",
    "summarization": "summarize",
    "comparison": "compare",
    "translation": "translate",
    "estimation": "estimate",
    "demonstration": "demonstrate",
    "illustration": "illustrate",
    "clarification": "clarify",
    "classification": "classify",
    "justification": "justify",
    "verification": "verify",
    "validation": "validate",
    "simplification": "simplify",
    "specification": "specify",
    "identification": "identify",
    "recommendation": "recommend",
    "documentation": "document",
    "transformation": "transform",
    "conversion": "convert",
    "generation": "generate",
    "creation": "create",
    "construction": "construct",
    "examination": "examine",
    "exploration": "explore",
    "investigation": "investigate",
    "interpretation": "interpret",
    "prediction": "predict",
    "measurement": "measure",
    "assessment": "assess",
    "improvement": "improve",
    "enumeration": "enumerate",
    "visualization": "visualize",
}

# Verbs that introduce a nominalization phrase ("provide a derivation of").
LIGHT_VERBS: frozenset[str] = frozenset(
    "provide give offer perform do make conduct produce present carry".split()
)

# Vague quantity/manner words flagged by lint. A non-empty value is a safe
# deterministic replacement; None means suggestion only.
VAGUE_QUANTITY_WORDS: dict[str, str | None] = {
    "briefly": "in 80 words",
    "quickly": None,
    "fast": None,
    "soon": None,
    "several": None,
    "many": None,
    "few": None,
    "various": None,
    "short": None,
    "long": None,
}

# Imperative verbs that commonly open task prompts; dilution inserts hedges
# in front of these.
PROMPT_VERBS: frozenset[str] = frozenset("""
explain solve list derive write compare describe identify find calculate
compute summarize translate give show prove answer reply state name define
sort return implement analyze evaluate estimate predict classify convert
generate create construct examine explore outline determine select rank
extract count measure plot draw design build compose
""".split())

# Interrogative scaffolds compressed by the densifier; the replacement keeps
# an imperative anchor so the task survives.
QUESTION_PATTERNS: tuple[tuple[str, str], ...] = (
    ("which one of the following options is", "Identify:"),
    ("which one of the following is", "Identify:"),
    ("which of the following options is", "Identify:"),
    ("which of the following options are", "Identify:"),
    ("which of the following is", "Identify:"),
    ("which of the following are", "Identify:"),
)
