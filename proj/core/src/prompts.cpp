// Built-in prompt templates.
#include <string>

#include "coba/error.hpp"
#include "coba/llm.hpp"

namespace coba {

namespace {

constexpr const char* kSentimentExtSystem =
    "You are a chatbot used for data augmentation. I will provide two "
    "paragraphs or internet comments for natural language understanding (NLU) "
    "tasks or sentiment analysis tasks.";

constexpr const char* kSentimentExtUser =
    "Please create semantic triples for the following sentence.\n"
    "Triple consists of three elements: subject, predicate, and object.\n"
    "\n"
    "Here is an example of a sentence and its corresponding Semantic Triplet:  "
    "A few people in a restaurant setting, one of them is drinking orange "
    "juice.\n"
    "\n"
    "1. A few people | are in | a restaurant setting\n"
    "2. One person | is drinking | orange juice\n"
    "\n"
    "Here is another example of a sentence and its corresponding Semantic "
    "Triplet:  A poor work that failed to provide a proper narrative for the "
    "black woman.\n"
    "\n"
    "1. A work | is | poor\n"
    "2. A work | failed to provide | a proper narrative\n"
    "3. A proper narrative | is for | the black woman\n"
    "\n"
    "Please provide no answers other than the semantic triplet. Output only "
    "the semantic triplet.\n"
    "\n"
    "Here is a paragraph you should make a semantic triplet:\n"
    "{content}";

constexpr const char* kSentimentRecSystem =
    "You are a chatbot used for data augmentation. Your job is reconstructing "
    "the selected triples into a sentence or paragraph.";

constexpr const char* kSentimentRecUser =
    "Please create sentences for the following Triples.\n"
    "\n"
    "Here is an example of a Semantic Triples and its corresponding "
    "reconstructed text:\n"
    "\n"
    "1. A few people | are in | a restaurant setting\n"
    "2. One person | is drinking | orange juice\n"
    "Output format:\n"
    "A few people in a restaurant setting, one of them is drinking orange "
    "juice.\n"
    "\n"
    "Here is another example of a Semantic Triples and its corresponding "
    "reconstructed text:\n"
    "2. I | am | a student\n"
    "1. I | am | a professor\n"
    "Output format:\n"
    "I am a student and also a professor.\n"
    "\n"
    "Please provide no answers other than the reconstructed text. Output only "
    "the reconstructed text. And don't consider the number of sentences in "
    "the input text.\n"
    "\n"
    "Please follow the order of the inputs strictly as they are written. Do "
    "not consider the numbers provided in the inputs. For example:\n"
    "2. I | am | a student\n"
    "1. I | am | a professor\n"
    "Output format:\n"
    "I am a student and also a professor.\n"
    "In this case, even though the sequence numbered \"2\" comes first "
    "numerically, ignore the numbers and generate the output starting with "
    "\"I | am | a student\" as shown in the example.\n"
    "\n"
    "Here is a Semantic Triples you should make a text:\n"
    "{content}";

constexpr const char* kNliExtSystem =
    "You are a chatbot used for data augmentation. I will provide two "
    "paragraphs or internet comments for natural language understanding "
    "tasks. This natural language understanding task has a label of "
    "entailment, contradiction, or neutral.";

constexpr const char* kNliExtUser =
    "You should creating semantic triples from the following paragraph, and "
    "select the most important semantic triples. Your task is to receive two "
    "sentences along with the label for a natural language understanding task "
    "corresponding to those sentences. For each sentence, you need to create "
    "semantic triples.\n"
    "\n"
    "Here is an example of two input sentence and label:\n"
    "\n"
    "sent1: A woman is walking across the street eating a banana, while a man "
    "is following with his briefcase.\n"
    "sent2: An actress and her favorite assistant talk a walk in the city.\n"
    "label: neutral\n"
    "\n"
    "Here is an output example of semantic triples:\n"
    "\n"
    "sent1:\n"
    "1-1. A woman | is walking | across the street\n"
    "1-2. A woman | is eating | a banana\n"
    "1-3. A man | is following | a woman\n"
    "1-4. A man | is carrying | a briefcase\n"
    "\n"
    "sent2:\n"
    "2-1. An actress | is walking | in the city\n"
    "2-2. An actress | is with | her favorite assistant\n"
    "2-3. An actress and her favorite assistant | are talking | while "
    "walking\n"
    "\n"
    "1. A few people | are in | a restaurant setting\n"
    "2. One person | is drinking | orange juice\n"
    "\n"
    "Here is an another example of two input sentence and label:\n"
    "\n"
    "sent1: Two women, holding food carryout containers, hug.\n"
    "sent2: Two groups of rival gang members flipped each other off.\n"
    "label: contradiction\n"
    "\n"
    "Here is an output example of above example:\n"
    "\n"
    "sent1:\n"
    "1-1. Two women | are holding | food carryout containers\n"
    "1-2. Two women | hug | each other\n"
    "\n"
    "sent2:\n"
    "2-1. Two groups of rival gang members | flipped | each other off\n"
    "\n"
    "Please provide no answers other than the semantic triplet. Output only "
    "the semantic triples.\n"
    "\n"
    "Here is a paragraph you should make a semantic triplet:\n"
    "{content}";

constexpr const char* kNliRecSystem =
    "You are a chatbot used for data augmentation. I will provide triples for "
    "natural language understanding tasks. This natural language "
    "understanding task has a label of entailment, contradiction, or neutral.";

constexpr const char* kNliRecUser =
    "You should reconstruct the semantic triples into a sentence or "
    "paragraph. Don't change other triplet. Then reconstruct the semantic "
    "triples into a sentence or paragraph.\n"
    "\n"
    "Here is an example of two input triples and label:\n"
    "\n"
    "sent1:\n"
    "1-1. An older woman | sits | at a small table\n"
    "1-2. An older woman | has | orange juice\n"
    "1-3. Employees | are smiling | in the background\n"
    "1-4. Employees | are wearing | bright colored shirts\n"
    "\n"
    "sent2:\n"
    "2-1. A girl | flips | a burger\n"
    "\n"
    "label: contradiction\n"
    "\n"
    "Here is example of output:\n"
    "\n"
    "reconstructed sent1:\n"
    "An older woman sits at a small table with a glass of orange juice, while "
    "employees in bright-colored shirts smile in the background.\n"
    "reconstructed sent2:\n"
    "A girl flips a burger.\n"
    "\n"
    "Here is another example of two input triples and label:\n"
    "\n"
    "sent1:\n"
    "1-1. The school | is having | a special event\n"
    "1-2. The special event | is to show | American culture\n"
    "1-3. American culture | deals with | other cultures in parties\n"
    "\n"
    "sent2:\n"
    "2-1. A school | is hosting | an event\n"
    "\n"
    "Here is example of output:\n"
    "\n"
    "reconstructed sent1:\n"
    "The school is having a special event in order to show the american "
    "culture on how other cultures are dealt with in parties.\n"
    "reconstructed sent2:\n"
    "A school is hosting an event.\n"
    "\n"
    "Please follow the example format exactly and only output the necessary "
    "graph triplets. Do not start with conversational phrases like \"Here's\" "
    "or \"Sure.\"\n"
    "\n"
    "Here is an semantic triples you should reconstruct:\n"
    "{content}";

constexpr const char* kModSystem =
    "You are a chatbot used for data augmentation. Your job is rewriting a "
    "semantic triple so that it carries a different label.";

constexpr const char* kModUser =
    "Rewrite this semantic triple so the sentence it expresses conveys the "
    "label '{target_label}'. Keep the subject unless impossible. Output "
    "exactly one line: subject | predicate | object.\n"
    "\n"
    "{content}";

}  // namespace

PromptTemplate default_template(TaskKind task, PromptStage stage) {
  PromptTemplate t;
  t.task = task;
  t.stage = stage;
  const bool nli = task == TaskKind::Nli3Way;
  switch (stage) {
    case PromptStage::Ext:
      t.system = nli ? kNliExtSystem : kSentimentExtSystem;
      t.user = nli ? kNliExtUser : kSentimentExtUser;
      break;
    case PromptStage::Mod:
      t.system = kModSystem;
      t.user = kModUser;
      break;
    case PromptStage::Rec:
      t.system = nli ? kNliRecSystem : kSentimentRecSystem;
      t.user = nli ? kNliRecUser : kSentimentRecUser;
      break;
  }
  return t;
}

PromptSet default_prompts(TaskKind task) {
  return {default_template(task, PromptStage::Ext),
          default_template(task, PromptStage::Mod),
          default_template(task, PromptStage::Rec)};
}

}  // namespace coba
