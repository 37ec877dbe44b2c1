#pragma once

// Stock judge prompts; identical to the files under templates/.

#include <string_view>

namespace longreward::default_templates {

inline constexpr std::string_view helpfulness = R"LRT(You are an expert at evaluating the quality of text.

As an impartial evaluator, please assess the usefulness of an AI document question-and-answer assistant's response to a user's query. Specifically, evaluate whether the response: 1) is relevant to the question; 2) meets the user's purpose and needs; 3) provides a thorough and appropriate answer; 4) meets the user's formatting requirements, if any;

You must first provide an analysis and then rate the response strictly according to the following format with a rating from 0 to 10: "[[Rating]]", for example: "[[5]]".

Here are a few scoring examples:

{Example 1}

{Example 2}

{Example 3}

{Example 4}

Now, please rate the following AI assistant's response based on the scoring principles and examples above:

[Question]
{Query}

[Assistant's Answer Begins]
{Model Response}
[Assistant's Answer Ends]

[Analysis]
)LRT";

inline constexpr std::string_view logicality = R"LRT(You are an expert at evaluating the quality of text.

As an impartial evaluator, please assess the logicality of an AI document question-and-answer assistant's response to a user's query. Specifically, assess whether the different parts of the response are logically consistent, whether the viewpoints remain consistent throughout, and whether the reasoning and calculations are correct, without self-contradictions.

You must first provide an analysis and then rate the response strictly according to the following format with a rating from 0 to 10: "[[Rating]]", for example: "[[5]]".

Make sure not to use any information or knowledge outside of the assistant's response during the evaluation, and focus solely on the logical consistency of the response.

Here are a few scoring examples:

{Example 1}

{Example 2}

{Example 3}

Now, please rate the following AI assistant's response based on the scoring principles and examples above:

[Question]
{Query}

[Assistant's Answer Begins]
{Model Response}
[Assistant's Answer Ends]

[Analysis]
)LRT";

inline constexpr std::string_view fact_break = R"LRT(You will receive a user query about an uploaded document (the document will not be displayed to you due to its length) and the answer from an AI document QA assistant. Your task is to extract factual statements from the answer provided. These factual statements are typically expressed in individual sentences and must be directly based on the information in the document, not introductory sentences, transition sentences, or summaries, inferences, or deductions based on previous answer content. If a factual statement lacks a subject or contains pronouns such as "he/she/it/these/those", you must add the subject or resolve the pronoun based on the context. You must output in the following format:

<statement>{{Statement 1}}</statement>
<statement>{{Statement 2}}</statement>
...

Here are a few examples:

{Example 1}

{Example 2}

{Example 3}

Now, please process the following AI assistant's answer according to the instructions and the examples above:

[Question]
{Query}

[Assistant's Answer Begins]
{Model Response}
[Assistant's Answer Ends]

[Factual Statements]
)LRT";

inline constexpr std::string_view fact_check = R"LRT(You are an expert at evaluating the quality of text.

You will receive a question from the user regarding an uploaded document, a factual statement in the AI assistant's response based on that document, and several fragments from the document (since the document is too long to display in its entirety). Your task is to carefully assess whether the statement is supported by these fragments. Please use the following ratings to generate your assessment:

- [[Fully supported]] - Almost all of the information in the statement is supported by or extracted from the fragments. This applies only if the statement is almost exactly the same as part of the content in the fragments.
- [[Partially supported]] - More than half of the content in the statement is supported by the fragments, but there are minor parts not present in or inconsistent with the fragments. For example, if the statement has two main points and only one is supported by the fragments, it should be considered partially supported.
- [[No support]] - The statement is largely unrelated to the fragments, or most of the key points in the statement are inconsistent with the fragments.

Ensure that you do not use any information or knowledge beyond the fragments provided, and only check whether the statement is supported by the fragments.

You must provide an analysis first, followed by the rating.

Here are some examples:

{Example 1}

{Example 2}

{Example 3}

Now, please refer to the rating principles and the above examples to rate the following statement:

[Statement]
{Factual Statement}

{Fragments}

[Analysis]
)LRT";

inline constexpr std::string_view extract_info = R"LRT(You will receive a document fragment and a question, and you need to extract all the information relevant to the question from the fragment in the following format:
"""
1. ...
2. ...
3. ...
...
"""
If there is no relevant information, you must output "No relevant information".

[Document Fragment Starts]
{Context Chunk}
[Document Fragment Ends]

[Question]
{Query}

[Relevant Information]
)LRT";

inline constexpr std::string_view completeness = R"LRT(You are an expert at evaluating the quality of text.

You will receive a user's question regarding a document, the relevant information from each part of the document, and an answer from an AI document question-answering assistant. Your task is to carefully assess the completeness of the AI assistant's answer based on the given information, that is, whether the answer covers the key points highly relevant to the question, does not omit important aspects, and provides sufficient information and details to meet the user's needs.

You need to first provide an analysis and then rate the answer on a scale from 0 to 10 strictly in the following format: "[[rating]]", for example: "[[5]]".

Here are a few scoring examples:

{Example 1}

{Example 2}

{Example 3}

Now, please rate the following AI assistant's response based on the scoring principles and examples above:

[Question]
{Query}

{Related Information}

[Assistant's Answer Begins]
{Model Response}
[Assistant's Answer Ends]

[Analysis]
)LRT";

}  // namespace longreward::default_templates
