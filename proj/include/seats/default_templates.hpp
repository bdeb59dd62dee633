#pragma once

#include <string_view>

// Built-in prompt templates, used whenever the config does not point at
// template files. The same texts are shipped under templates/ for
// editing; a test keeps the two in sync.

namespace seats::default_templates {

inline constexpr std::string_view kSystem =
    R"(You are an expert machine learning engineer. Your task is to develop a
high-performance model for the task described below. Generate complete,
self-contained code that:
1. Loads and preprocesses the provided dataset
2. Implements a novel model architecture
3. Trains the model and saves checkpoints
4. Generates predictions on the evaluation split
5. Prints the final evaluation metric
Focus on designing novel and effective core model architectures rather
than writing long helper functions.
)";

inline constexpr std::string_view kBase =
    R"(## Task
Develop a forecasting model for {{task_name}}.

## Dataset
{{dataset_description}}

## Evaluation Metric
{{metric_name}}: {{metric_definition}}
{{direction_sentence}}
Your program must print its final score on a line of the form
"SEATS_METRIC: <value>" (alternatively, write {"metric": <value>} to a
metrics.json file in its working directory).

## Reference Code
{{reference_code}}
)";

inline constexpr std::string_view kReview =
    R"(## Introduction
You are an expert ML engineer reviewing code. Identify logical errors
that lead to overly optimistic metrics, such as data leakage and
normalization issues. Focus on logic errors only.

## Generated Code
{{code}}

## Execution Output
{{execution_output}}

## Instructions
1. Check for data leakage: only flag leakage of future data from the
   evaluation split.
2. Check inference code correctness, especially checkpoint/parameter
   matching.
3. If you find a logical error, print the exact code snippet causing it
   in a section starting with "FINDINGS:".
4. For each error, review again to prove yourself wrong. Only flag it if
   you are certain.
5. Suggest prompt improvements to prevent similar errors in future
   iterations, on a single line starting with "PROMPT_SUGGESTION:".

At the end, you MUST answer:
'has_logical_error = True' or
'has_logical_error = False'
)";

inline constexpr std::string_view kUpdate =
    R"(## Introduction
You are a prompt engineer. Integrate the new suggestion into the running
prompt concisely.

## Current Running Prompt
{{current}}

## New Suggestion for Improvement
{{insight}}

## Instructions
1. Extract only actionable insights, specific code patterns, and
   concrete recommendations.
2. Organize with clear sections (e.g., '## Model Architecture',
   '## Data Processing').
3. Prune contradictory or low-confidence info.
4. Remove redundancy with existing insights.
5. Include code snippets or pseudocode where relevant.
6. Output ONLY the updated running prompt.
)";

inline constexpr std::string_view kGenerationContext =
    R"({{base}}
## Accumulated Insights (Running Prompt)
{{running}}

## Parent Context
{{context}}

## Global Comparison
{{global}}

## Archive Elites
{{archive}}

## Remaining Iterations
You have {{remaining}} iterations remaining out of {{total}}.
Consider trying underexplored approaches.

## Response Format
Respond with exactly three parts, in this order:

PLAN:
<short design rationale>

One fenced code block containing the complete, self-contained program.

DESCRIPTOR: d1=<x> d2=<y> d3=<z>
All three components are reals in [0,1]:
- d1 architecture type: tree-based 0.0, decomposition 0.4, attention 0.6, hybrid 1.0
- d2 feature-engineering sophistication: none 0.0 to extensive 1.0
- d3 training sophistication: basic 0.0 to advanced 1.0
)";

} // namespace seats::default_templates
