"""Prompt template catalog and the PromptSpec carrier passed to LM gateways.

Each template is a fixed instruction block followed by labelled input fields,
rendered into a single completion prompt. Placeholders use {name} syntax and
every placeholder must be bound before a spec is sent to a gateway.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

_PLACEHOLDER_RE = re.compile(r"\{([a-z_][a-z0-9_]*)\}")


@dataclass(frozen=True)
class Template:
    template_id: str
    text: str
    max_output_tokens: int = 512

    @property
    def placeholders(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for m in _PLACEHOLDER_RE.finditer(self.text):
            seen.setdefault(m.group(1))
        return tuple(seen)


@dataclass
class PromptSpec:
    """One fully-bound prompt ready for an LM gateway."""

    template_id: str
    fields: dict[str, str] = field(default_factory=dict)
    max_output_tokens: int | None = None

    def template(self) -> Template:
        try:
            return TEMPLATES[self.template_id]
        except KeyError:
            raise ValueError(f"unknown template_id: {self.template_id!r}") from None

    def validate(self) -> None:
        """Every placeholder in the template must have a binding."""
        tpl = self.template()
        missing = [p for p in tpl.placeholders if p not in self.fields]
        if missing:
            raise ValueError(
                f"template {self.template_id!r} has unbound placeholders: {missing}"
            )

    def render(self) -> str:
        self.validate()
        tpl = self.template()
        return _PLACEHOLDER_RE.sub(lambda m: str(self.fields[m.group(1)]), tpl.text)

    def field_hash(self) -> str:
        """Stable hash of the ordered field bindings; keys scripted fixtures."""
        payload = json.dumps(
            [[k, str(v)] for k, v in self.fields.items()],
            ensure_ascii=False,
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def spec(template_id: str, **fields: str) -> PromptSpec:
    """Build a PromptSpec with fields bound in keyword order."""
    return PromptSpec(template_id=template_id, fields={k: str(v) for k, v in fields.items()})


QUESTION_TO_QUERY = Template(
    "question_to_query",
    """You want to answer the question or support a claim using Google search.
What do you type in the search box?
The question is raised in a round table discussion on a topic. The question may or may not focus on the topic itself.
Write the queries you will use in the following format:
- query 1
- query 2
...
- query n

Topic context: {topic}
I want to collect information about: {question}
Queries:
""",
    max_output_tokens=128,
)

ANSWER_QUESTION = Template(
    "answer_question",
    """You are an expert who can use information effectively. You have gathered the related information and will now use the information to form a response.
Make your response as informative as possible and make sure every sentence is supported by the gathered information.
If [Gathered information] is not directly related to the [Topic] and [Question], start your response with "Based on the available information, I cannot fully address the question." Then, provide the most relevant answer you can based on the available information, and explain any limitations or gaps.
Use [1], [2], ..., [n] in line (for example, "The capital of the United States is Washington, D.C.[1][3].").
You DO NOT need to include a References or Sources section to list the sources at the end. The style of writing should be formal.

Topic you are discussing about: {topic}
You want to provide insight on: {question}
Gathered information:
{info}
Style of your response should be: {style}
Now give your response. (Try to use as many different sources as possible and do not hallucinate.)
""",
    max_output_tokens=768,
)

CONVERT_STYLE = Template(
    "convert_style",
    """You are an invited speaker in the round table conversation.
Your task is to make the question or the response more conversational and engaging to facilitate the flow of conversation.
Note that this is ongoing conversation so no need to have welcoming and concluding words. Previous speaker utterance is provided only for making the conversation more natural.
Note that do not hallucinate and keep the citation index like [1] as it is. Also,

You are inivited as: {expert}
You want to contribute to conversation by: {action}
Previous speaker said: {prev}
Question or response you want to say: {content}
Your utterance (keep the information as much as you can with citations, prefer shorter answers without loss of information):
""",
    max_output_tokens=768,
)

INSERT_NAVIGATE = Template(
    "insert_navigate",
    """Your job is to insert the given information to the knowledge base. The knowledge base is a tree based data structure to organize the collection information. Each knowledge node contains information derived from themantically similar question or intent.
To decide the best placement of the information, you will be navigated in this tree based data structure layer by layer.
You will be presented with the question and query leads to ththeis information, and tree structure.

Output should strictly follow one of options presetned below with no other information.
- 'insert': to place the information under the current node.
- 'step: [child node name]': to step into a specified child node.
- 'create: [new child node name]': to create new child node and insert the info under it.

Example outputs:
- insert
- step: node2
- create: node3

Question and query leads to this info: {intent}
Tree structure:
{structure}
Choice:
""",
    max_output_tokens=64,
)

INSERT_CANDIDATE_CHOICE = Template(
    "insert_candidate_choice",
    """Your job is to insert the given information to the knowledge base. The knowledge base is a tree based data structure to organize the collection information. Each knowledge node contains information derived from themantically similar question or intent.
You will be presented with the question and query leads to this information, and candidate choices of placement. In these choices, -> denotes parent-child relationship. Note that reasonable may not be in these choices.

If there exists reasonable choice, output "Best placement: [choice index]"; otherwise, output "No reasonable choice".

Question and query leads to this info: {intent}
Candidate placement:
{choices}
Decision:
""",
    max_output_tokens=32,
)

KB_SUMMARY = Template(
    "kb_summary",
    """Your job is to give brief summary of what's been discussed in a roundtable conversation. Contents are themantically organized into hierarchical sections.
You will be presented with these sections where "#" denotes level of section.

topic: {topic}
Tree structure:
{structure}
Now give brief summary:
""",
    max_output_tokens=256,
)

GROUNDED_QUESTION = Template(
    "grounded_question",
    """Your job is to find next discussion focus in a roundtable conversation. You will be given previous conversation summary and some information that might assist you discover new discussion focus.
Note that the new discussion focus should bring new angle and perspective to the discussion and avoid repetition. The new discussion focus should be grounded on the available information and push the boundaries of the current discussion for broader exploration.
The new discussion focus should have natural flow from last utterance in the conversation.
Use [1][2] in line to ground your question.

topic: {topic}
Discussion history:
{summary}
Available information:
{information}
Last utterance in the conversation:
{last_utterance}
Now give next discussion focus in the format of one sentence question:
""",
    max_output_tokens=128,
)

GENERATE_EXPERTS_WITH_FOCUS = Template(
    "generate_experts_with_focus",
    """You need to select a group of speakers who will be suitable to have roundtable discussion on the [topic] of specific [focus].
You may consider inviting speakers having opposite stands on the topic; speakers representing different interest parties; Ensure that the selected speakers are directly connected to the specific context and scenario provided.
For example, if the discussion focus is about a recent event at a specific university, consider inviting students, faculty members, journalists covering the event, university officials, and local community members.
Use the background information provided about the topic for inspiration. For each speaker, add a description of their interests and what they will focus on during the discussion.
No need to include speakers name in the output.
Strictly follow format below:
1. [speaker 1 role]: [speaker 1 short description]
2. [speaker 2 role]: [speaker 2 short description]

Topic of interest: {topic}
Background information:
{background_info}
Discussion focus: {focus}
Number of speakers needed: {top_n}
""",
    max_output_tokens=384,
)

INTENT_DECISION = Template(
    "intent_decision",
    """You are taking the next turn in a round table discussion. Based on the conversation so far and your own perspective, decide what kind of contribution you should make.
Answer with exactly one of the following labels and nothing else:
- Original Question: initiate a new question for the group.
- Information Request: ask for additional information about the previous utterance.
- Potential Answer: offer a possible answer to a previously posed question.
- Further Details: add supplementary information to a previous answer.

You are invited as: {persona}
Topic: {topic}
Conversation so far:
{history}
Your choice:
""",
    max_output_tokens=16,
)

DIRECT_QUESTION = Template(
    "direct_question",
    """You are taking the next turn in a round table discussion and want to ask the group a question from your own perspective.
Ask one concise question that moves the discussion forward. Do not answer it yourself and do not add any preamble.

You are invited as: {persona}
Topic: {topic}
Conversation so far:
{history}
Your question:
""",
    max_output_tokens=96,
)

SUBTOPIC_SPLIT = Template(
    "subtopic_split",
    """A knowledge base node has collected too many pieces of information and needs to be split into subtopics.
Read the questions that led to the collected information and propose a short list of subtopic names that would organize them well.
Strictly follow format below:
1. [subtopic 1 name]
2. [subtopic 2 name]

Node name: {node}
Questions behind the collected information:
{questions}
Subtopics:
""",
    max_output_tokens=128,
)

SECTION_WRITE = Template(
    "section_write",
    """You are writing one section of a long-form report on the given topic. Write the section using only the gathered information below.
Make sure every claim is supported by the gathered information. Use [1], [2], ..., [n] in line to cite the information that supports each sentence.
Do not include a references list and do not repeat the section title.

Topic: {topic}
Section: {heading}
Gathered information:
{info}
Now write the section:
""",
    max_output_tokens=768,
)

SIMULATED_USER = Template(
    "simulated_user",
    """You are a curious user exploring a topic with an underlying goal in mind. Read the discussion so far and ask the one follow-up question that would best advance your goal.
Ask exactly one question with no preamble.

Topic: {topic}
Your goal: {goal}
Discussion so far:
{history}
Your question:
""",
    max_output_tokens=96,
)

RUBRIC_GRADE = Template(
    "rubric_grade",
    """You are grading a piece of writing against a rubric. Read the rubric and the text, then output only the integer score from 1 to 5 that best matches the text.

Criterion: {criterion}
Score 1: {score_1}
Score 2: {score_2}
Score 3: {score_3}
Score 4: {score_4}
Score 5: {score_5}
Text to grade:
{text}
Score (1-5):
""",
    max_output_tokens=8,
)

TEMPLATES: dict[str, Template] = {
    t.template_id: t
    for t in (
        QUESTION_TO_QUERY,
        ANSWER_QUESTION,
        CONVERT_STYLE,
        INSERT_NAVIGATE,
        INSERT_CANDIDATE_CHOICE,
        KB_SUMMARY,
        GROUNDED_QUESTION,
        GENERATE_EXPERTS_WITH_FOCUS,
        INTENT_DECISION,
        DIRECT_QUESTION,
        SUBTOPIC_SPLIT,
        SECTION_WRITE,
        SIMULATED_USER,
        RUBRIC_GRADE,
    )
}

# The hedge sentence the answer prompt instructs the model to lead with when
# the gathered information cannot support the question.
INSUFFICIENT_GROUNDING_HEDGE = (
    "Based on the available information, I cannot fully address the question."
)
